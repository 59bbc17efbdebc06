#pragma once

#include "regpos/body.hpp"
#include "regpos/subspace.hpp"

#include <cstdint>

namespace regpos {

/// P_E(K ∩ G) for subspaces E ⊆ G, in coordinates of the orthonormal basis of E.
///
/// section(K, F) is G = E = F; project(K, F) is G = R^n, E = F. Gauges are
/// min over the fiber G ⊖ E; supports are min of h_K over G^⊥.
class SectionBody {
 public:
  enum class Mode { section, projection, general };

  static SectionBody section(const ConvexBody& K, const Subspace& F);
  static SectionBody projection(const ConvexBody& K, const Subspace& F);
  static SectionBody general(const ConvexBody& K, const Subspace& E, const Subspace& G);
  /// (P_F K) ∩ E for E ⊆ F, evaluated as P_E(K ∩ (F^⊥ + E)).
  static SectionBody projection_then_section(const ConvexBody& K, const Subspace& F, const Subspace& E);

  [[nodiscard]] int dim() const { return carrier_.dim(); }
  [[nodiscard]] Mode mode() const { return mode_; }
  [[nodiscard]] const ConvexBody& parent() const { return parent_; }
  [[nodiscard]] const Subspace& carrier() const { return carrier_; }
  /// Orthonormal basis of G ⊖ E; empty for sections.
  [[nodiscard]] const Mat& fiber() const { return fiber_; }
  /// Orthonormal basis of G^⊥; empty for projections.
  [[nodiscard]] const Mat& normal() const { return normal_; }

  [[nodiscard]] double gauge(const Vec& u) const;
  /// Gauge and a subgradient in carrier coordinates; `lifted` receives the optimal point in R^n.
  double gauge_with(const Vec& u, Vec* grad, Vec* lifted = nullptr) const;
  [[nodiscard]] double support(const Vec& y) const;

  /// Quadratic form of the body in carrier coordinates when the parent is an ellipsoid.
  [[nodiscard]] std::optional<Mat> quadratic_form() const;

  /// The same body as a ConvexBody of dimension dim().
  [[nodiscard]] ConvexBody as_body() const;

 private:
  SectionBody(ConvexBody K, Subspace E, Mat fiber, Mat normal, Mode mode);

  ConvexBody parent_;
  Subspace carrier_;
  Mat fiber_;
  Mat normal_;
  Mode mode_;
  std::optional<ConvexBody> polar_parent_;
};

struct RadiusOptions {
  int probes = 1000;
  int starts = 64;
  int steps = 200;
  std::uint64_t seed = 0x5ec7;
};

struct RadiusEstimate {
  double value = 0.0;
  Vec point;          ///< unit carrier vector attaining `value`
  bool exact = false; ///< closed form; otherwise a certified bound from the best point found
};

/// R(S) = max over unit u of 1/gauge_S(u). Non-exact values are lower bounds.
/// `warm` adds starting directions (carrier coordinates) to the random probes.
RadiusEstimate out_radius(const SectionBody& S, const RadiusOptions& opts = {}, const std::vector<Vec>& warm = {});
/// r(S) = min over unit u of 1/gauge_S(u). Non-exact values are upper bounds.
RadiusEstimate in_radius(const SectionBody& S, const RadiusOptions& opts = {});

struct Distance {
  double value = 1.0;
  RadiusEstimate R;
  RadiusEstimate r;
};
/// d_G(S, B_2) = R(S) / r(S).
Distance geometric_distance_to_ball(const SectionBody& S, const RadiusOptions& opts = {});

/// Max over sampled unit u in E1 ∩ E2 of
/// |gauge of P_{E1∩E2}(A ∩ E1) at u  -  gauge of (P_{E2} A) ∩ E1 at u|.
/// Requires E1 ⊇ E2^⊥.
double perp_identity_check(const ConvexBody& A, const Subspace& E1, const Subspace& E2, Rng& rng, int directions = 1000);

}  // namespace regpos
