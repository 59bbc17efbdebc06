#pragma once

// Extremization of positively homogeneous functions on the unit sphere of R^m.

#include "regpos/rng.hpp"
#include "regpos/types.hpp"

#include <functional>

namespace regpos {

/// f(u, grad) returns f(u); when grad is non-null it receives a (sub)gradient.
using HomogeneousFn = std::function<double(const Vec&, Vec*)>;

struct SphereExtremum {
  double value = 0.0;
  Vec point;
  int evaluations = 0;
};

struct SphereSearch {
  int probes = 1000;  ///< random directions evaluated before local search
  int starts = 64;    ///< best probes refined locally
  int steps = 200;
  double tol = 1e-12;
};

/// Local maximization of a convex, 1-homogeneous f by u <- grad f(u) / |grad f(u)|.
/// f(u_{t+1}) >= |grad f(u_t)| >= f(u_t), so the iteration is monotone.
SphereExtremum power_ascent(const HomogeneousFn& f, Vec u0, int steps, double tol);

/// Local minimization by projected (sub)gradient steps with step halving;
/// a step is accepted only on strict decrease.
SphereExtremum projected_descent(const HomogeneousFn& f, Vec u0, int steps, double tol);

/// Multistart maximization: probes, then power ascent from the best `starts`.
SphereExtremum maximize_on_sphere(const HomogeneousFn& f, int m, Rng& rng, const SphereSearch& opts);

/// Multistart minimization with a caller-provided local refiner.
SphereExtremum minimize_on_sphere(const HomogeneousFn& f, int m, Rng& rng, const SphereSearch& opts,
                                  const std::function<SphereExtremum(Vec)>& refine);

/// Uniform direction on S^{m-1}.
Vec random_direction(Rng& rng, int m);

}  // namespace regpos
