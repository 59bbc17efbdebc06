#pragma once

#include "regpos/rng.hpp"
#include "regpos/types.hpp"

#include <vector>

namespace regpos {

/// m-dimensional subspace of R^n stored by an n x m orthonormal basis.
class Subspace {
 public:
  Subspace() = default;

  /// Orthonormalizes the columns of `spanning`; throws DegenerateBody on rank deficiency.
  static Subspace from_span(const Mat& spanning);
  /// Trusts that `basis` is already orthonormal.
  static Subspace from_orthonormal(Mat basis);
  static Subspace full(int n);
  static Subspace coordinate(int n, const std::vector<int>& axes);

  [[nodiscard]] int ambient() const { return static_cast<int>(basis_.rows()); }
  [[nodiscard]] int dim() const { return static_cast<int>(basis_.cols()); }
  [[nodiscard]] const Mat& basis() const { return basis_; }
  [[nodiscard]] Mat projector() const { return basis_ * basis_.transpose(); }

  [[nodiscard]] Subspace complement() const;
  [[nodiscard]] Vec coordinates(const Vec& x) const { return basis_.transpose() * x; }
  [[nodiscard]] Vec embed(const Vec& u) const { return basis_ * u; }
  /// max over basis columns v of other of |v - P v|.
  [[nodiscard]] double containment_residual(const Subspace& inner) const;
  [[nodiscard]] double orthonormality_residual() const;

 private:
  Mat basis_;
};

Subspace sum(const Subspace& a, const Subspace& b);
Subspace intersection(const Subspace& a, const Subspace& b);

/// Column span of an n x m Gaussian matrix.
Subspace haar_grassmannian(Rng& rng, int n, int m);

/// F of dimension n-k+1 and E ⊆ F of dimension n-2k+2.
struct Flag {
  Subspace F;
  Subspace E;
};

Flag haar_flag(Rng& rng, int n, int k);

/// Flag read off an orthonormal n x (n-k+1) frame: F = all columns, E = the first n-2k+2.
Flag flag_from_frame(const Mat& frame, int k);

}  // namespace regpos
