#include "regpos/sphere_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace regpos {

Vec random_direction(Rng& rng, int m) {
  Vec u = gaussian_vector(rng, m);
  double nrm = u.norm();
  while (nrm == 0.0) {
    u = gaussian_vector(rng, m);
    nrm = u.norm();
  }
  return u / nrm;
}

SphereExtremum power_ascent(const HomogeneousFn& f, Vec u0, int steps, double tol) {
  SphereExtremum best;
  Vec u = u0.normalized();
  Vec g;
  double v = f(u, &g);
  best.value = v;
  best.point = u;
  best.evaluations = 1;
  for (int s = 0; s < steps; ++s) {
    const double gn = g.norm();
    if (!(gn > 0.0) || !std::isfinite(gn)) break;
    Vec next = g / gn;
    Vec gnext;
    const double vnext = f(next, &gnext);
    ++best.evaluations;
    if (!(vnext > v * (1.0 + tol))) {
      if (vnext > best.value) {
        best.value = vnext;
        best.point = next;
      }
      break;
    }
    u = std::move(next);
    g = std::move(gnext);
    v = vnext;
    best.value = v;
    best.point = u;
  }
  return best;
}

SphereExtremum projected_descent(const HomogeneousFn& f, Vec u0, int steps, double tol) {
  SphereExtremum best;
  Vec u = u0.normalized();
  Vec g;
  double v = f(u, &g);
  best.evaluations = 1;
  double angle = 0.25;
  for (int s = 0; s < steps && angle > 1e-10; ++s) {
    Vec t = g - g.dot(u) * u;
    const double tn = t.norm();
    if (!(tn > tol * std::max(v, 1e-300))) break;
    t /= tn;
    bool moved = false;
    while (angle > 1e-10) {
      Vec cand = (std::cos(angle) * u - std::sin(angle) * t).normalized();
      Vec gc;
      const double vc = f(cand, &gc);
      ++best.evaluations;
      if (vc < v) {
        u = std::move(cand);
        g = std::move(gc);
        v = vc;
        angle = std::min(1.0, angle * 1.5);
        moved = true;
        break;
      }
      angle *= 0.5;
    }
    if (!moved) break;
  }
  best.value = v;
  best.point = u;
  return best;
}

namespace {

std::vector<Vec> best_probes(const HomogeneousFn& f, int m, Rng& rng, const SphereSearch& opts, bool maximize,
                             int& evals) {
  const int probes = std::max(opts.probes, opts.starts);
  std::vector<Vec> dirs;
  std::vector<double> vals;
  dirs.reserve(probes);
  vals.reserve(probes);
  for (int i = 0; i < probes; ++i) {
    dirs.push_back(random_direction(rng, m));
    vals.push_back(f(dirs.back(), nullptr));
  }
  evals += probes;
  std::vector<int> idx(probes);
  std::iota(idx.begin(), idx.end(), 0);
  const int keep = std::min(opts.starts, probes);
  std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(), [&](int a, int b) {
    return maximize ? vals[a] > vals[b] : vals[a] < vals[b];
  });
  std::vector<Vec> out;
  out.reserve(keep);
  for (int i = 0; i < keep; ++i) out.push_back(dirs[idx[i]]);
  return out;
}

}  // namespace

SphereExtremum maximize_on_sphere(const HomogeneousFn& f, int m, Rng& rng, const SphereSearch& opts) {
  SphereExtremum best;
  best.value = -1.0;
  if (m == 1) {
    best.point = Vec::Ones(1);
    best.value = f(best.point, nullptr);
    best.evaluations = 1;
    return best;
  }
  int evals = 0;
  for (const Vec& start : best_probes(f, m, rng, opts, true, evals)) {
    SphereExtremum local = power_ascent(f, start, opts.steps, opts.tol);
    evals += local.evaluations;
    if (local.value > best.value) best = std::move(local);
  }
  best.evaluations = evals;
  return best;
}

SphereExtremum minimize_on_sphere(const HomogeneousFn& f, int m, Rng& rng, const SphereSearch& opts,
                                  const std::function<SphereExtremum(Vec)>& refine) {
  SphereExtremum best;
  best.value = std::numeric_limits<double>::infinity();
  if (m == 1) {
    best.point = Vec::Ones(1);
    best.value = f(best.point, nullptr);
    best.evaluations = 1;
    return best;
  }
  int evals = 0;
  for (const Vec& start : best_probes(f, m, rng, opts, false, evals)) {
    SphereExtremum local = refine(start);
    evals += local.evaluations;
    if (local.value < best.value) best = std::move(local);
  }
  best.evaluations = evals;
  return best;
}

}  // namespace regpos
