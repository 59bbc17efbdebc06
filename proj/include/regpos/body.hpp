#pragma once

#include "regpos/position_map.hpp"
#include "regpos/sphere_opt.hpp"
#include "regpos/types.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace regpos {

enum class Family {
  ellipsoid,
  weighted_lp,
  polytope_h,
  polytope_v,
  linear_image,
  polar,
  complexified,
  surrogate,
  section,
};

const char* family_name(Family f);

struct Symmetry {
  bool sign_flips = false;
  bool permutations = false;
  bool circled = false;
};

/// Norm x -> || w ∘ x ||_p. `p` may be infinity.
struct LpForm {
  double p = 2.0;
  Vec scales;
};

/// min_z gauge(x0 + W z) with the minimizer and a subgradient in x0.
struct AffineMin {
  double value = 0.0;
  Vec z;
  Vec grad_x0;
  bool converged = true;
  double residual = 0.0;
};

/// r(K) = largest Euclidean ball inside K, R(K) = smallest containing K.
struct Radii {
  double r = 0.0;
  double R = 0.0;
  bool r_exact = false;
  bool R_exact = false;
};

class ConvexBody;

class BodyImpl {
 public:
  virtual ~BodyImpl() = default;

  [[nodiscard]] virtual int dim() const = 0;
  [[nodiscard]] virtual Family family() const = 0;
  [[nodiscard]] virtual Symmetry symmetry() const { return {}; }
  /// Oracles are closed form or solved to solver precision.
  [[nodiscard]] virtual bool exact() const { return true; }

  virtual double gauge(const Vec& x, Vec* subgrad) const = 0;
  /// h_K(y); `point` receives a maximizer x in K.
  virtual double support(const Vec& y, Vec* point) const;
  virtual AffineMin min_gauge_affine(const Vec& x0, const Mat& W) const;

  [[nodiscard]] virtual std::optional<LpForm> lp_form() const { return std::nullopt; }
  [[nodiscard]] virtual std::optional<Mat> quadratic_form() const { return std::nullopt; }
  [[nodiscard]] virtual std::optional<ConvexBody> closed_polar() const;
  [[nodiscard]] virtual std::optional<Radii> exact_radii() const { return std::nullopt; }
  [[nodiscard]] virtual std::string spec_json() const = 0;

  /// Exact radii when available, otherwise multistart estimates (cached).
  [[nodiscard]] const Radii& radii() const;

 private:
  mutable std::once_flag radii_once_;
  mutable Radii radii_;
};

using BodyPtr = std::shared_ptr<const BodyImpl>;

/// Origin-symmetric convex body with non-empty interior, given by its oracles.
/// Immutable; oracles are safe to call concurrently.
class ConvexBody {
 public:
  explicit ConvexBody(BodyPtr impl);

  /// {x : x^T A x <= 1} for SPD A.
  static ConvexBody ellipsoid(const Mat& A);
  /// (sum v_i |x_i|^p)^{1/p}; for p = inf the norm is max v_i |x_i|.
  static ConvexBody weighted_lp(double p, const Vec& v);
  /// || w ∘ x ||_p.
  static ConvexBody lp_from_scales(double p, const Vec& w);
  static ConvexBody unit_ball(double p, int n);
  /// {x : |<a_j, x>| <= 1 for all rows a_j}.
  static ConvexBody polytope_h(const Mat& rows);
  /// Convex hull of ±v_i over the rows v_i.
  static ConvexBody polytope_v(const Mat& vertices);

  [[nodiscard]] int dim() const { return impl_->dim(); }
  [[nodiscard]] Family family() const { return impl_->family(); }
  [[nodiscard]] Symmetry symmetry() const { return impl_->symmetry(); }
  [[nodiscard]] bool exact() const { return impl_->exact(); }

  [[nodiscard]] double gauge(const Vec& x) const;
  [[nodiscard]] Vec gauge_subgradient(const Vec& x) const;
  [[nodiscard]] double support(const Vec& y) const;
  [[nodiscard]] Vec support_point(const Vec& y) const;
  [[nodiscard]] AffineMin min_gauge_affine(const Vec& x0, const Mat& W) const;

  [[nodiscard]] std::optional<LpForm> lp_form() const { return impl_->lp_form(); }
  [[nodiscard]] std::optional<Mat> quadratic_form() const { return impl_->quadratic_form(); }

  [[nodiscard]] ConvexBody polar() const;

  [[nodiscard]] const Radii& radii() const { return impl_->radii(); }
  [[nodiscard]] double in_radius() const { return radii().r; }
  [[nodiscard]] double out_radius() const { return radii().R; }

  [[nodiscard]] std::string spec_json() const { return impl_->spec_json(); }
  [[nodiscard]] const BodyImpl& impl() const { return *impl_; }
  [[nodiscard]] const BodyPtr& ptr() const { return impl_; }

 private:
  BodyPtr impl_;
};

ConvexBody polar(const ConvexBody& K);
/// T(K), with gauge x -> gauge_K(T^{-1} x).
ConvexBody linear_image(const PositionMap& T, const ConvexBody& K);
ConvexBody scaled(double a, const ConvexBody& K);
/// Circled body on R^{2n} = C^n with gauge(x + iy) = max_θ ||cos θ x + sin θ y||_K.
ConvexBody complexify(const ConvexBody& K);

/// R_L(K) = max_x gauge_L(x) / gauge_K(x).
struct RelativeRadius {
  double value = 0.0;
  Vec direction;
  bool exact = false;
};
RelativeRadius relative_out_radius(const ConvexBody& K, const ConvexBody& L, std::uint64_t seed = 1,
                                   const SphereSearch& opts = {});

/// Minimizes a convex function of z by BFGS with a weak Wolfe line search.
/// Works for nonsmooth objectives given any subgradient.
struct ConvexMin {
  double value = 0.0;
  Vec z;
  Vec grad;
  int iterations = 0;
  bool converged = false;
};
ConvexMin bfgs_minimize(const std::function<double(const Vec&, Vec*)>& f, Vec z0, int max_iter = 300,
                        double tol = 1e-12);

/// Orthonormal basis of the orthogonal complement of span(y) in R^n.
Mat orthogonal_complement(const Mat& basis);

}  // namespace regpos
