#pragma once

#include "regpos/body.hpp"
#include "regpos/gaussian.hpp"
#include "regpos/position_map.hpp"
#include "regpos/section.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace regpos {

/// F(T): the diagonal det-1 map putting [K, T^{-1} B_2]_θ in l-position on the sample.
/// `start_log` is a diagonal warm start for the inner solve.
PositionMap fixed_point_map(const ConvexBody& K, const PositionMap& T, double theta, const GaussianSample& sample,
                            const Mat* start_log = nullptr, double inner_tol = 1e-9);

struct RegularOptions {
  double beta = 0.5;
  double tol = 1e-5;
  int max_iter = 200;
  int samples = 20000;
  std::uint64_t seed = 1;
  SampleOptions sample{true, true};
  /// Diagonal of the starting map (normalized to det 1); empty means the identity.
  Vec start;
};

struct FixedPointResult {
  PositionMap T;
  double alpha = 0.0;
  double theta = 0.0;
  double residual = 0.0;  ///< || log T - log F(T) ||_inf at the returned T
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  double scale = 1.0;     ///< balance scale a
  std::optional<ConvexBody> body;  ///< a T(K)
  EllEstimate ell;        ///< l of [K̄, B_2]_θ
  EllEstimate ell_star;
  double ell_bound = 0.0; ///< sqrt(2 n Φ(θ))
};

FixedPointResult find_regular_position(const ConvexBody& K, double alpha, const RegularOptions& opts = {});

struct GelfandEstimate {
  int k = 0;
  double value = 0.0;  ///< empirical quantile of R(K ∩ F)
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double level = 0.0;  ///< exceedance probability actually used
  bool clamped = false;
  double upper = 0.0;  ///< min over sampled F
  int samples = 0;
  bool exact = false;  ///< every radius came from a closed form
};

struct GelfandOptions {
  double c = 0.5;
  int bootstrap = 200;
  RadiusOptions radius{64, 2, 100, 0x5ec7};
};

/// cr_k(K) for each k on the grid from one nested chain of Haar subspaces per sample:
/// F_k is spanned by the first n-k+1 columns of a Haar orthogonal frame.
std::vector<GelfandEstimate> random_gelfand_curve(const ConvexBody& K, const std::vector<int>& ks, int samples,
                                                  std::uint64_t seed, const GelfandOptions& opts = {});

/// Single-k version of random_gelfand_curve.
GelfandEstimate random_gelfand(const ConvexBody& K, int k, int samples, std::uint64_t seed,
                               const GelfandOptions& opts = {});

/// Min over sampled F in G_{n,n-k+1} of R(K ∩ F): an upper bound on c_k.
double gelfand_upper(const ConvexBody& K, int k, int samples, std::uint64_t seed, const GelfandOptions& opts = {});

/// Powers of two in [1, n/2].
std::vector<int> default_k_grid(int n);

struct RegularityReport {
  int n = 0;
  double alpha = 0.0;
  std::vector<GelfandEstimate> body;
  std::vector<GelfandEstimate> polar;
  double slope_body = 0.0;  ///< least-squares slope of log cr_k against log(n/k)
  double slope_polar = 0.0;
  double P_emp = 0.0;       ///< max over grid and both bodies of cr_k (k/n)^α
};

RegularityReport regularity_report(const ConvexBody& Kbar, double alpha, const std::vector<int>& ks, int samples,
                                   std::uint64_t seed, const GelfandOptions& opts = {});

/// Slope of the least-squares line through (x_i, y_i).
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace regpos
