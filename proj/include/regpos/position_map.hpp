#pragma once

#include "regpos/types.hpp"

namespace regpos {

/// Invertible linear map on R^n together with its inverse and inverse-adjoint.
///
/// Maps produced by the position solvers are symmetric positive definite with
/// determinant one; `det_normalized()` and `diagonal()` record which guarantees hold.
class PositionMap {
 public:
  PositionMap() = default;

  static PositionMap identity(int n);
  static PositionMap from_matrix(const Mat& m);
  static PositionMap diagonal(const Vec& d);
  /// Uniform scaling x -> a x.
  static PositionMap scaling(int n, double a);
  /// exp(S) for symmetric S; diagonal when S is.
  static PositionMap exp_symmetric(const Mat& s);

  [[nodiscard]] int dim() const { return static_cast<int>(matrix_.rows()); }
  [[nodiscard]] const Mat& matrix() const { return matrix_; }
  [[nodiscard]] const Mat& inverse() const { return inverse_; }
  /// T^{-*}, the map sending polar(K) to polar(T K).
  [[nodiscard]] const Mat& adjoint_inverse() const { return adjoint_inverse_; }
  [[nodiscard]] bool is_diagonal() const { return diagonal_; }
  [[nodiscard]] bool det_normalized() const { return det_normalized_; }
  [[nodiscard]] double determinant() const { return det_; }
  [[nodiscard]] Vec diagonal_entries() const { return matrix_.diagonal(); }

  [[nodiscard]] Vec apply(const Vec& x) const { return diagonal_ ? Vec(matrix_.diagonal().cwiseProduct(x)) : Vec(matrix_ * x); }
  [[nodiscard]] Vec apply_inverse(const Vec& x) const {
    return diagonal_ ? Vec(inverse_.diagonal().cwiseProduct(x)) : Vec(inverse_ * x);
  }

  /// Rescales to |det| = 1.
  [[nodiscard]] PositionMap normalized() const;
  [[nodiscard]] PositionMap inverse_map() const;
  [[nodiscard]] PositionMap adjoint_inverse_map() const;
  [[nodiscard]] PositionMap compose(const PositionMap& inner) const;  // this ∘ inner

 private:
  void finish();

  Mat matrix_;
  Mat inverse_;
  Mat adjoint_inverse_;
  double det_ = 1.0;
  bool diagonal_ = false;
  bool det_normalized_ = false;
};

}  // namespace regpos
