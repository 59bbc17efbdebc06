#include "regpos/position_map.hpp"

#include <cmath>

namespace regpos {

namespace {
bool is_diag(const Mat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != 0.0) return false;
    }
  }
  return true;
}
}  // namespace

void PositionMap::finish() {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw DimensionMismatch("position map must be a non-empty square matrix");
  }
  if (!matrix_.allFinite()) throw NonFiniteInput("position map has non-finite entries");
  diagonal_ = is_diag(matrix_);
  if (diagonal_) {
    const Vec d = matrix_.diagonal();
    if ((d.array() == 0.0).any()) throw DegenerateBody("singular position map");
    inverse_ = d.cwiseInverse().asDiagonal();
    det_ = d.prod();
  } else {
    Eigen::FullPivLU<Mat> lu(matrix_);
    if (!lu.isInvertible()) throw DegenerateBody("singular position map");
    inverse_ = lu.inverse();
    det_ = lu.determinant();
  }
  if (!std::isfinite(det_) || det_ == 0.0) throw DegenerateBody("singular position map");
  adjoint_inverse_ = inverse_.transpose();
  det_normalized_ = std::abs(std::abs(det_) - 1.0) <= 1e-10;
}

PositionMap PositionMap::identity(int n) { return from_matrix(Mat::Identity(n, n)); }

PositionMap PositionMap::from_matrix(const Mat& m) {
  PositionMap t;
  t.matrix_ = m;
  t.finish();
  return t;
}

PositionMap PositionMap::diagonal(const Vec& d) { return from_matrix(d.asDiagonal().toDenseMatrix()); }

PositionMap PositionMap::scaling(int n, double a) { return diagonal(Vec::Constant(n, a)); }

PositionMap PositionMap::exp_symmetric(const Mat& s) {
  if (is_diag(s)) return diagonal(s.diagonal().array().exp().matrix());
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
  const Mat& v = es.eigenvectors();
  return from_matrix(v * es.eigenvalues().array().exp().matrix().asDiagonal() * v.transpose());
}

PositionMap PositionMap::normalized() const {
  const double scale = std::pow(std::abs(det_), -1.0 / static_cast<double>(dim()));
  PositionMap t = from_matrix(matrix_ * scale);
  t.det_normalized_ = true;
  return t;
}

PositionMap PositionMap::inverse_map() const { return from_matrix(inverse_); }

PositionMap PositionMap::adjoint_inverse_map() const { return from_matrix(adjoint_inverse_); }

PositionMap PositionMap::compose(const PositionMap& inner) const {
  if (inner.dim() != dim()) throw DimensionMismatch("composing maps of different dimension");
  return from_matrix(matrix_ * inner.matrix_);
}

}  // namespace regpos
