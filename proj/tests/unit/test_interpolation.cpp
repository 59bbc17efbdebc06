#include "regpos/interpolation.hpp"
#include "regpos/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace regpos;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("theta and phi") {
  CHECK(theta_of_alpha(1.0) == 0.5);
  CHECK(theta_of_alpha(0.75) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(phi(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi(0.5) == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(theta_of_alpha(0.5), HypothesisViolated);
  CHECK_THROWS_AS(phi(0.0), HypothesisViolated);
}

TEST_CASE("B_1 and B_inf interpolate to B_2 at one half") {
  Rng rng = make_stream(1, 0);
  const int n = 5;
  const ConvexBody J = interpolate({ConvexBody::unit_ball(1.0, n), ConvexBody::unit_ball(kInf, n), 0.5});
  for (int j = 0; j < 50; ++j) {
    const Vec x = gaussian_vector(rng, n);
    CHECK(J.gauge(x) == doctest::Approx(x.norm()).epsilon(1e-12));
  }
}

TEST_CASE("weighted closed form") {
  // 1/p = 0.6/1 + 0.4/2 = 0.8, w = w0^0.6 w1^0.4
  const Vec w0 = (Vec(3) << 1.0, 2.0, 4.0).finished();
  const Vec w1 = (Vec(3) << 3.0, 1.0, 0.5).finished();
  const ConvexBody J = interpolate({ConvexBody::lp_from_scales(1.0, w0), ConvexBody::lp_from_scales(2.0, w1), 0.4});
  const auto f = J.lp_form();
  REQUIRE(f.has_value());
  CHECK(f->p == doctest::Approx(1.25).epsilon(1e-14));
  for (int i = 0; i < 3; ++i) {
    CHECK(f->scales(i) == doctest::Approx(std::pow(w0(i), 0.6) * std::pow(w1(i), 0.4)).epsilon(1e-14));
  }
  const Vec x = (Vec(3) << 0.3, -1.0, 0.2).finished();
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) acc += std::pow(std::abs(f->scales(i) * x(i)), 1.25);
  CHECK(J.gauge(x) == doctest::Approx(std::pow(acc, 0.8)).epsilon(1e-12));
}

TEST_CASE("diagonal ellipsoid with the ball") {
  // [E_v, B_2]_θ is the ellipsoid with weights v^{1-θ}
  const Vec v = (Vec(2) << 4.0, 0.25).finished();
  const ConvexBody E = ConvexBody::ellipsoid(v.asDiagonal().toDenseMatrix());
  const ConvexBody J = interpolate({E, ConvexBody::unit_ball(2.0, 2), 0.25});
  const Vec x = (Vec(2) << 1.0, 2.0).finished();
  const double expect = std::sqrt(std::pow(4.0, 0.75) * 1.0 + std::pow(0.25, 0.75) * 4.0);
  CHECK(J.gauge(x) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("endpoints") {
  const ConvexBody a = ConvexBody::lp_from_scales(1.5, (Vec(3) << 1, 2, 3).finished());
  const ConvexBody b = ConvexBody::unit_ball(kInf, 3);
  const Vec x = (Vec(3) << 0.2, -0.7, 1.1).finished();
  CHECK(interpolate({a, b, 0.0}).gauge(x) == doctest::Approx(a.gauge(x)).epsilon(1e-12));
  CHECK(interpolate({a, b, 1.0}).gauge(x) == doctest::Approx(b.gauge(x)).epsilon(1e-12));
}

TEST_CASE("surrogate sits inside the interpolant") {
  Rng rng = make_stream(2, 0);
  const InterpolationPair pr{ConvexBody::unit_ball(1.0, 4), ConvexBody::unit_ball(kInf, 4), 0.3};
  const ConvexBody S = surrogate(pr);
  const ConvexBody J = interpolate(pr);
  for (int j = 0; j < 200; ++j) {
    const Vec x = gaussian_vector(rng, 4);
    const double expect = std::pow(x.lpNorm<1>(), 0.7) * std::pow(x.lpNorm<Eigen::Infinity>(), 0.3);
    CHECK(S.gauge(x) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(S.gauge(x) >= J.gauge(x) * (1.0 - 1e-12));
  }
}

TEST_CASE("property suite passes and refuses intractable pairs") {
  const InterpolationPair pr{ConvexBody::lp_from_scales(1.0, (Vec(4) << 1, 2, 0.5, 1).finished()),
                             ConvexBody::unit_ball(3.0, 4), 0.6};
  const PropertyReport rep = property_suite(pr, 3, 300);
  CHECK(rep.passed());
  CHECK(rep.checks.size() >= 6);
  Rng rng = make_stream(3, 0);
  const ConvexBody H = ConvexBody::polytope_h(gaussian_matrix(rng, 6, 4));
  const InterpolationPair bad{H, ConvexBody::unit_ball(2.0, 4), 0.5};
  CHECK_FALSE(bad.tractable());
  CHECK_THROWS_AS(interpolate(bad), NotTractable);
}
