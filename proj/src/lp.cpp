#include "regpos/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace regpos::lp {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;

// Tableau layout: rows 0..m-1 constraints, row m objective.
// Columns 0..n-1 structural, n..n+m-1 artificial (identity block), last = rhs.
struct Tableau {
  RowMat t;
  std::vector<int> basis;
  int m = 0;
  int n = 0;

  [[nodiscard]] int rhs() const { return n + m; }

  void pivot(int row, int col) {
    const double p = t(row, col);
    t.row(row) /= p;
    for (int r = 0; r <= m; ++r) {
      if (r == row) continue;
      const double f = t(r, col);
      if (f != 0.0) t.row(r) -= f * t.row(row);
    }
    basis[row] = col;
  }

  // Runs the simplex on the current objective row. Columns >= allowed_cols never enter.
  Status run(int allowed_cols, int max_pivots, int& pivots) {
    int degenerate = 0;
    while (true) {
      if (pivots >= max_pivots) return Status::iteration_limit;
      const bool bland = degenerate > 50;
      int enter = -1;
      double best = -kCostTol;
      for (int j = 0; j < allowed_cols; ++j) {
        const double rc = t(m, j);
        if (rc < best) {
          enter = j;
          if (bland) break;
          best = rc;
        }
      }
      if (enter < 0) return Status::optimal;

      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        const double a = t(r, enter);
        if (a > kPivotTol) {
          const double q = t(r, rhs()) / a;
          if (q < ratio - 1e-12 || (q <= ratio + 1e-12 && leave >= 0 && basis[r] < basis[leave])) {
            ratio = q;
            leave = r;
          }
        }
      }
      if (leave < 0) return Status::unbounded;
      degenerate = ratio < 1e-13 ? degenerate + 1 : 0;
      pivot(leave, enter);
      ++pivots;
    }
  }
};

}  // namespace

Result solve_standard(const Mat& A, const Vec& b, const Vec& c, int max_pivots) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Result out;

  Tableau tab;
  tab.m = m;
  tab.n = n;
  tab.t = RowMat::Zero(m + 1, n + m + 1);
  tab.basis.assign(m, -1);
  std::vector<double> flip(m, 1.0);
  for (int i = 0; i < m; ++i) {
    flip[i] = b(i) < 0.0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = flip[i] * A.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, tab.rhs()) = flip[i] * b(i);
  }

  // Natural unit columns give a feasible starting basis for their rows.
  std::vector<char> row_done(m, 0);
  for (int j = 0; j < n; ++j) {
    int hit = -1;
    bool unit = true;
    for (int i = 0; i < m && unit; ++i) {
      const double v = tab.t(i, j);
      if (v == 0.0) continue;
      if (v == 1.0 && hit < 0) {
        hit = i;
      } else {
        unit = false;
      }
    }
    if (unit && hit >= 0 && !row_done[hit]) {
      tab.basis[hit] = j;
      row_done[hit] = 1;
    }
  }
  bool need_phase1 = false;
  for (int i = 0; i < m; ++i) {
    if (!row_done[i]) {
      tab.basis[i] = n + i;
      need_phase1 = true;
    }
  }

  int pivots = 0;
  if (need_phase1) {
    // Phase one: minimize the sum of basic artificials.
    tab.t.row(m).setZero();
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] >= n) {
        tab.t(m, n + i) = 1.0;
      }
    }
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] >= n) tab.t.row(m) -= tab.t.row(i);
    }
    // Only artificials that started basic may take part; others stay blocked.
    const Status s = tab.run(n, max_pivots, pivots);
    if (s == Status::iteration_limit) {
      out.status = s;
      out.pivots = pivots;
      return out;
    }
    if (-tab.t(m, tab.rhs()) > 1e-8 * (1.0 + b.cwiseAbs().maxCoeff())) {
      out.status = Status::infeasible;
      out.pivots = pivots;
      return out;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] < n) continue;
      for (int j = 0; j < n; ++j) {
        if (std::abs(tab.t(i, j)) > 1e-9) {
          tab.pivot(i, j);
          ++pivots;
          break;
        }
      }
    }
  }

  // Phase two objective row: c_j - c_B B^{-1} A_j.
  tab.t.row(m).setZero();
  tab.t.row(m).head(n) = c.transpose();
  for (int i = 0; i < m; ++i) {
    const int j = tab.basis[i];
    const double cb = j < n ? c(j) : 0.0;
    if (cb != 0.0) tab.t.row(m) -= cb * tab.t.row(i);
  }
  const Status s = tab.run(n, max_pivots, pivots);
  out.status = s;
  out.pivots = pivots;
  if (s != Status::optimal) return out;

  out.x = Vec::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] < n) out.x(tab.basis[i]) = tab.t(i, tab.rhs());
  }
  out.objective = c.dot(out.x);
  // Artificial column i carries B^{-1} e_i, so its reduced cost is -y_i (flipped rows).
  out.duals = Vec(m);
  for (int i = 0; i < m; ++i) out.duals(i) = -tab.t(m, n + i) * flip[i];
  return out;
}

AffineValue min_sum_abs(const Mat& C, const Vec& x0, const Mat& W) {
  const int rows = static_cast<int>(C.rows());
  const int d = static_cast<int>(W.cols());
  AffineValue out;
  const Vec r0 = C * x0;
  if (d == 0) {
    out.value = r0.cwiseAbs().sum();
    out.z = Vec(0);
    out.grad_x0 = C.transpose() * r0.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
    out.ok = true;
    return out;
  }
  const Mat CW = C * W;
  // variables [z+ (d), z- (d), r+ (rows), r- (rows)];  CW (z+ - z-) - r+ + r- = -C x0
  Mat A = Mat::Zero(rows, 2 * d + 2 * rows);
  A.leftCols(d) = CW;
  A.middleCols(d, d) = -CW;
  A.middleCols(2 * d, rows) = -Mat::Identity(rows, rows);
  A.rightCols(rows) = Mat::Identity(rows, rows);
  Vec cost = Vec::Zero(2 * d + 2 * rows);
  cost.tail(2 * rows).setOnes();
  const Result res = solve_standard(A, -r0, cost);
  if (res.status != Status::optimal) return out;
  out.value = res.objective;
  out.z = res.x.head(d) - res.x.segment(d, d);
  // b = -C x0  =>  d value / d x0 = -C^T y
  out.grad_x0 = -(C.transpose() * res.duals);
  out.ok = true;
  return out;
}

AffineValue min_max_abs(const Mat& C, const Vec& x0, const Mat& W) {
  const int rows = static_cast<int>(C.rows());
  const int d = static_cast<int>(W.cols());
  AffineValue out;
  const Vec r0 = C * x0;
  if (d == 0) {
    Eigen::Index arg = 0;
    out.value = r0.cwiseAbs().maxCoeff(&arg);
    out.z = Vec(0);
    const double s = r0(arg) >= 0 ? 1.0 : -1.0;
    out.grad_x0 = s * C.row(arg).transpose();
    out.ok = true;
    return out;
  }
  const Mat CW = C * W;
  const double t0 = r0.cwiseAbs().maxCoeff();
  // t = t0 - tau:   CW z + tau + s+ = t0 - r0,   -CW z + tau + s- = t0 + r0,   min -tau
  const int nv = 2 * d + 1 + 2 * rows;
  Mat A = Mat::Zero(2 * rows, nv);
  A.block(0, 0, rows, d) = CW;
  A.block(0, d, rows, d) = -CW;
  A.block(rows, 0, rows, d) = -CW;
  A.block(rows, d, rows, d) = CW;
  A.col(2 * d).setOnes();
  A.rightCols(2 * rows) = Mat::Identity(2 * rows, 2 * rows);
  Vec b(2 * rows);
  b.head(rows) = t0 - r0.array();
  b.tail(rows) = t0 + r0.array();
  Vec cost = Vec::Zero(nv);
  cost(2 * d) = -1.0;
  const Result res = solve_standard(A, b, cost);
  if (res.status != Status::optimal) return out;
  out.value = t0 + res.objective;
  out.z = res.x.head(d) - res.x.segment(d, d);
  const Vec yp = res.duals.head(rows);
  const Vec ym = res.duals.tail(rows);
  out.grad_x0 = C.transpose() * (ym - yp);
  out.ok = true;
  return out;
}

AffineValue max_over_slab_polytope(const Mat& M, const Vec& g) {
  const int rows = static_cast<int>(M.rows());
  const int d = static_cast<int>(M.cols());
  AffineValue out;
  // u = u+ - u-;  M u + s = 1;  -M u + s' = 1;  minimize -g^T u
  const int nv = 2 * d + 2 * rows;
  Mat A = Mat::Zero(2 * rows, nv);
  A.block(0, 0, rows, d) = M;
  A.block(0, d, rows, d) = -M;
  A.block(rows, 0, rows, d) = -M;
  A.block(rows, d, rows, d) = M;
  A.rightCols(2 * rows) = Mat::Identity(2 * rows, 2 * rows);
  Vec b = Vec::Ones(2 * rows);
  Vec cost = Vec::Zero(nv);
  cost.head(d) = -g;
  cost.segment(d, d) = g;
  const Result res = solve_standard(A, b, cost);
  if (res.status != Status::optimal) return out;
  out.value = -res.objective;
  out.z = res.x.head(d) - res.x.segment(d, d);
  out.ok = true;
  return out;
}

}  // namespace regpos::lp
