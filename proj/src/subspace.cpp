#include "regpos/subspace.hpp"

#include "regpos/body.hpp"

#include <cmath>

namespace regpos {

Subspace Subspace::from_span(const Mat& spanning) {
  const Eigen::Index n = spanning.rows();
  const Eigen::Index m = spanning.cols();
  if (n == 0 || m > n) throw DimensionMismatch("subspace: need 0 <= m <= n and n >= 1");
  if (!spanning.allFinite()) throw NonFiniteInput("subspace: non-finite spanning set");
  Subspace s;
  if (m == 0) {
    s.basis_ = Mat(n, 0);
    return s;
  }
  Eigen::HouseholderQR<Mat> qr(spanning);
  const Mat R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const double big = R.diagonal().cwiseAbs().maxCoeff();
  if (!(R.diagonal().cwiseAbs().minCoeff() > 1e-10 * big)) throw DegenerateBody("subspace: rank-deficient spanning set");
  s.basis_ = qr.householderQ() * Mat::Identity(n, m);
  // fix column signs so that the frame is a continuous function of the spanning set
  for (Eigen::Index j = 0; j < m; ++j) {
    if (R(j, j) < 0) s.basis_.col(j) *= -1.0;
  }
  return s;
}

Subspace Subspace::from_orthonormal(Mat basis) {
  Subspace s;
  s.basis_ = std::move(basis);
  return s;
}

Subspace Subspace::full(int n) { return from_orthonormal(Mat::Identity(n, n)); }

Subspace Subspace::coordinate(int n, const std::vector<int>& axes) {
  Mat b = Mat::Zero(n, static_cast<Eigen::Index>(axes.size()));
  for (std::size_t j = 0; j < axes.size(); ++j) {
    if (axes[j] < 0 || axes[j] >= n) throw DimensionMismatch("coordinate subspace: axis out of range");
    b(axes[j], static_cast<Eigen::Index>(j)) = 1.0;
  }
  return from_span(b);
}

Subspace Subspace::complement() const { return from_orthonormal(orthogonal_complement(basis_)); }

double Subspace::containment_residual(const Subspace& inner) const {
  if (inner.ambient() != ambient()) throw DimensionMismatch("containment: ambient dimensions differ");
  if (inner.dim() == 0) return 0.0;
  const Mat r = inner.basis() - basis_ * (basis_.transpose() * inner.basis());
  return r.colwise().norm().maxCoeff();
}

double Subspace::orthonormality_residual() const {
  if (dim() == 0) return 0.0;
  return (basis_.transpose() * basis_ - Mat::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

Subspace sum(const Subspace& a, const Subspace& b) {
  if (a.ambient() != b.ambient()) throw DimensionMismatch("sum: ambient dimensions differ");
  Mat both(a.ambient(), a.dim() + b.dim());
  both << a.basis(), b.basis();
  Eigen::JacobiSVD<Mat> svd(both, Eigen::ComputeThinU);
  const Vec s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > 1e-10 * std::max(1.0, s(0));
  return Subspace::from_orthonormal(svd.matrixU().leftCols(rank));
}

Subspace intersection(const Subspace& a, const Subspace& b) {
  if (a.ambient() != b.ambient()) throw DimensionMismatch("intersection: ambient dimensions differ");
  // x = A c lies in b  <=>  (I - P_b) A c = 0
  const Mat residual = a.basis() - b.basis() * (b.basis().transpose() * a.basis());
  Eigen::JacobiSVD<Mat> svd(residual, Eigen::ComputeFullV);
  const Vec s = svd.singularValues();
  const Eigen::Index m = a.dim();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > 1e-10;
  const Mat null = svd.matrixV().rightCols(m - rank);
  return Subspace::from_span(a.basis() * null);
}

Subspace haar_grassmannian(Rng& rng, int n, int m) {
  if (m < 1 || m > n) throw DimensionMismatch("haar_grassmannian: need 1 <= m <= n");
  for (;;) {
    try {
      return Subspace::from_span(gaussian_matrix(rng, n, m));
    } catch (const DegenerateBody&) {
      // probability zero; draw again
    }
  }
}

Flag flag_from_frame(const Mat& frame, int k) {
  const int n = static_cast<int>(frame.rows());
  if (k < 1 || 2 * k > n || frame.cols() < n - k + 1) throw DimensionMismatch("flag: need 1 <= k <= n/2");
  Flag f;
  f.F = Subspace::from_orthonormal(frame.leftCols(n - k + 1));
  f.E = Subspace::from_orthonormal(frame.leftCols(n - 2 * k + 2));
  return f;
}

Flag haar_flag(Rng& rng, int n, int k) {
  if (k < 1 || 2 * k > n) throw DimensionMismatch("haar_flag: need 1 <= k <= n/2");
  const Subspace F = haar_grassmannian(rng, n, n - k + 1);
  return flag_from_frame(F.basis(), k);
}

}  // namespace regpos
