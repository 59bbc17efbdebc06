#pragma once

// Dense two-phase simplex for the small linear programs behind polytope gauges
// and piecewise-linear projections.

#include "regpos/types.hpp"

namespace regpos::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
  Status status = Status::iteration_limit;
  double objective = 0.0;
  Vec x;      ///< primal solution
  Vec duals;  ///< y with A^T y <= c; d(objective)/d(b) at the optimum
  int pivots = 0;
};

/// minimize c^T x  subject to  A x = b,  x >= 0.
///
/// Rows whose sign-normalized form already contains a unit column start with
/// that column basic; the remaining rows get artificials and a phase-one pass.
Result solve_standard(const Mat& A, const Vec& b, const Vec& c, int max_pivots = 100000);

/// Value and gradient (w.r.t. x0) of  min_z  sum_j |<c_j, x0 + W z>|.
struct AffineValue {
  double value = 0.0;
  Vec z;
  Vec grad_x0;
  bool ok = false;
};
AffineValue min_sum_abs(const Mat& C, const Vec& x0, const Mat& W);

/// Value and gradient (w.r.t. x0) of  min_z  max_j |<c_j, x0 + W z>|.
AffineValue min_max_abs(const Mat& C, const Vec& x0, const Mat& W);

/// max g^T u  subject to  |<m_j, u>| <= 1 for every row m_j of M.
/// Returns the value and the maximizer u in `z`.
AffineValue max_over_slab_polytope(const Mat& M, const Vec& g);

}  // namespace regpos::lp
