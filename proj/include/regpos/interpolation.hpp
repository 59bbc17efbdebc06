#pragma once

#include "regpos/body.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace regpos {

/// θ = 1 - 1/(2α); α must exceed 1/2.
double theta_of_alpha(double alpha);
/// Φ(θ) = 1 / tan(πθ/4), θ in (0, 1].
double phi(double theta);

struct InterpolationPair {
  ConvexBody K0;
  ConvexBody K1;
  double theta = 0.5;

  /// Both bodies are weighted lp balls in the standard basis (diagonal ellipsoids included).
  [[nodiscard]] bool tractable() const;
};

/// Closed-form [K0, K1]_θ for tractable pairs: the || w ∘ x ||_p ball with
/// 1/p = (1-θ)/p0 + θ/p1 and w = w0^{1-θ} w1^θ. Throws NotTractable otherwise.
ConvexBody interpolate(const InterpolationPair& pair);

/// {x : ||x||_0^{1-θ} ||x||_1^θ <= 1}. Star-shaped, not convex in general; inside the true interpolant.
ConvexBody surrogate(const InterpolationPair& pair);

struct PropertyCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;
  [[nodiscard]] bool passed() const;
};

/// Endpoints, duality, diagonal linear maps, scaling, the geometric-mean inequality,
/// equality on basis vectors and sign-flip invariance, each on `points` sampled points.
PropertyReport property_suite(const InterpolationPair& pair, std::uint64_t seed = 1, int points = 1000);

}  // namespace regpos
