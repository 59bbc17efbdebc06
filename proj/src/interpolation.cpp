#include "regpos/interpolation.hpp"

#include "regpos/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace regpos {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inverse(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

class SurrogateImpl final : public BodyImpl {
 public:
  SurrogateImpl(ConvexBody k0, ConvexBody k1, double theta) : k0_(std::move(k0)), k1_(std::move(k1)), theta_(theta) {}

  int dim() const override { return k0_.dim(); }
  Family family() const override { return Family::surrogate; }
  Symmetry symmetry() const override {
    const Symmetry a = k0_.symmetry();
    const Symmetry b = k1_.symmetry();
    return {a.sign_flips && b.sign_flips, a.permutations && b.permutations, a.circled && b.circled};
  }

  double gauge(const Vec& x, Vec* g) const override {
    Vec g0;
    Vec g1;
    const double a = k0_.impl().gauge(x, g ? &g0 : nullptr);
    const double b = k1_.impl().gauge(x, g ? &g1 : nullptr);
    const double v = std::pow(a, 1.0 - theta_) * std::pow(b, theta_);
    if (g) {
      if (a > 0 && b > 0) {
        *g = v * ((1.0 - theta_) / a * g0 + theta_ / b * g1);
      } else {
        *g = Vec::Zero(x.size());
      }
    }
    return v;
  }

  std::string spec_json() const override {
    nlohmann::json j{{"family", "surrogate"},
                     {"theta", theta_},
                     {"a", nlohmann::json::parse(k0_.spec_json())},
                     {"b", nlohmann::json::parse(k1_.spec_json())}};
    return j.dump();
  }

 private:
  ConvexBody k0_;
  ConvexBody k1_;
  double theta_;
};

double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0 ? std::abs(a - b) / s : 0.0;
}

}  // namespace

double theta_of_alpha(double alpha) {
  if (!(alpha > 0.5) || !std::isfinite(alpha)) throw HypothesisViolated("alpha must be a finite number > 1/2");
  return 1.0 - 1.0 / (2.0 * alpha);
}

double phi(double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw HypothesisViolated("phi: theta must lie in (0, 1]");
  return 1.0 / std::tan(std::numbers::pi * theta / 4.0);
}

bool InterpolationPair::tractable() const {
  return K0.dim() == K1.dim() && K0.lp_form().has_value() && K1.lp_form().has_value();
}

ConvexBody interpolate(const InterpolationPair& pair) {
  const double th = pair.theta;
  if (!(th >= 0.0 && th <= 1.0)) throw HypothesisViolated("interpolate: theta must lie in [0, 1]");
  if (pair.K0.dim() != pair.K1.dim()) throw DimensionMismatch("interpolate: dimensions differ");
  if (!pair.tractable()) throw NotTractable("no closed-form interpolant for this pair; use surrogate()");
  const LpForm f0 = *pair.K0.lp_form();
  const LpForm f1 = *pair.K1.lp_form();
  if (th == 0.0) return ConvexBody::lp_from_scales(f0.p, f0.scales);
  if (th == 1.0) return ConvexBody::lp_from_scales(f1.p, f1.scales);
  const double inv = (1.0 - th) * inverse(f0.p) + th * inverse(f1.p);
  const double p = inv == 0.0 ? kInf : std::max(1.0, 1.0 / inv);
  const Vec w = (f0.scales.array().pow(1.0 - th) * f1.scales.array().pow(th)).matrix();
  return ConvexBody::lp_from_scales(p, w);
}

ConvexBody surrogate(const InterpolationPair& pair) {
  if (pair.K0.dim() != pair.K1.dim()) throw DimensionMismatch("surrogate: dimensions differ");
  if (!(pair.theta >= 0.0 && pair.theta <= 1.0)) throw HypothesisViolated("surrogate: theta must lie in [0, 1]");
  return ConvexBody(std::make_shared<SurrogateImpl>(pair.K0, pair.K1, pair.theta));
}

bool PropertyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

PropertyReport property_suite(const InterpolationPair& pair, std::uint64_t seed, int points) {
  const int n = pair.K0.dim();
  const double th = pair.theta;
  const ConvexBody J = interpolate(pair);
  Rng rng = make_stream(seed, 0x1e7);
  Mat X(n, points);
  for (int j = 0; j < points; ++j) X.col(j) = gaussian_vector(rng, n) * std::exp(gaussian_vector(rng, 1)(0));

  PropertyReport rep;
  auto compare = [&](const std::string& name, const ConvexBody& A, const ConvexBody& B, double tol) {
    double worst = 0.0;
    for (int j = 0; j < points; ++j) worst = std::max(worst, rel_diff(A.gauge(X.col(j)), B.gauge(X.col(j))));
    rep.checks.push_back({name, worst, tol, worst <= tol});
  };

  compare("endpoint_theta0", interpolate({pair.K0, pair.K1, 0.0}), pair.K0, 1e-9);
  compare("endpoint_theta1", interpolate({pair.K0, pair.K1, 1.0}), pair.K1, 1e-9);
  compare("duality", polar(J), interpolate({polar(pair.K0), polar(pair.K1), th}), 1e-9);

  Vec d(n);
  for (int i = 0; i < n; ++i) d(i) = std::exp(0.5 * gaussian_vector(rng, 1)(0));
  const PositionMap T = PositionMap::diagonal(d);
  compare("diagonal_linear_map", linear_image(T, J), interpolate({linear_image(T, pair.K0), linear_image(T, pair.K1), th}),
          1e-9);

  const double a = 3.0;
  const double b = 1.0;
  compare("scaling", interpolate({scaled(a, pair.K0), scaled(b, pair.K1), th}),
          scaled(std::pow(a, 1.0 - th) * std::pow(b, th), J), 1e-9);

  double excess = 0.0;
  for (int j = 0; j < points; ++j) {
    const Vec x = X.col(j);
    const double bound = std::pow(pair.K0.gauge(x), 1.0 - th) * std::pow(pair.K1.gauge(x), th);
    excess = std::max(excess, (J.gauge(x) - bound) / bound);
  }
  rep.checks.push_back({"geometric_mean_inequality", std::max(excess, 0.0), 1e-12, excess <= 1e-12});

  double basis = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec e = Vec::Unit(n, i);
    basis = std::max(basis, rel_diff(J.gauge(e), std::pow(pair.K0.gauge(e), 1.0 - th) * std::pow(pair.K1.gauge(e), th)));
  }
  rep.checks.push_back({"basis_vector_equality", basis, 1e-9, basis <= 1e-9});

  double flips = 0.0;
  for (int j = 0; j < points; ++j) {
    Vec x = X.col(j);
    const double g = J.gauge(x);
    for (int i = 0; i < n; ++i) {
      if (uniform01(rng) < 0.5) x(i) = -x(i);
    }
    flips = std::max(flips, rel_diff(g, J.gauge(x)));
  }
  rep.checks.push_back({"sign_flip_invariance", flips, 1e-15, flips <= 1e-15});
  return rep;
}

}  // namespace regpos
