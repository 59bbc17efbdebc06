#include "regpos/gaussian.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace regpos;

TEST_CASE("expected gaussian norm") {
  CHECK(expected_gaussian_norm(1) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
  CHECK(expected_gaussian_norm(2) == doctest::Approx(std::sqrt(std::numbers::pi / 2.0)).epsilon(1e-14));
  // E|G_3| = 2 sqrt(2/pi)
  CHECK(expected_gaussian_norm(3) == doctest::Approx(2.0 * std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
  CHECK(expected_gaussian_norm(400) == doctest::Approx(std::sqrt(399.5)).epsilon(1e-5));
}

TEST_CASE("sample sizes and reproducibility") {
  const GaussianSample a(7, 20000, 16, {true, true});
  CHECK(GaussianSample::orbit_size(16) == 512);
  CHECK(a.count() == 20480);
  const GaussianSample b(7, 20000, 16, {true, true});
  CHECK(a.points() == b.points());
  const GaussianSample c(8, 20000, 16, {true, true});
  CHECK(a.points() != c.points());
  CHECK(GaussianSample(1, 100, 5).count() == 100);
  CHECK_THROWS_AS(GaussianSample(1, 0, 5), ConfigError);
}

TEST_CASE("moment matching gives identity covariance") {
  for (SampleOptions o : {SampleOptions{true, false}, SampleOptions{true, true}}) {
    const GaussianSample s(3, 3000, 8, o);
    const Mat C = s.points() * s.points().transpose() / s.count();
    CHECK((C - Mat::Identity(8, 8)).norm() <= 1e-10);
    CHECK(s.points().rowwise().mean().norm() <= 1e-10);
  }
}

TEST_CASE("ell of the euclidean ball") {
  const int n = 10;
  const GaussianSample s(11, 40000, n);
  const EllEstimate e = ell(ConvexBody::unit_ball(2.0, n), 1, s);
  CHECK(std::abs(e.value - expected_gaussian_norm(n)) <= 4.0 * e.se);
  // moment matched: E|G|^2 = n on the nose
  const GaussianSample m(11, 4000, n, {true, false});
  CHECK(ell(ConvexBody::unit_ball(2.0, n), 2, m).value == doctest::Approx(std::sqrt(n)).epsilon(1e-12));
  CHECK(mstar(ConvexBody::unit_ball(2.0, n), s).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ell of B_inf against E max|g_i|") {
  // E max |g_i| for n = 2: 2/sqrt(pi)
  const GaussianSample s(12, 60000, 2);
  const EllEstimate e = ell(ConvexBody::unit_ball(std::numeric_limits<double>::infinity(), 2), 1, s);
  CHECK(std::abs(e.value - 2.0 / std::sqrt(std::numbers::pi)) <= 4.0 * e.se);
}

TEST_CASE("ell_star agrees with ell of the polar and scales inversely") {
  const int n = 6;
  const GaussianSample s(13, 5000, n);
  const ConvexBody B1 = ConvexBody::unit_ball(1.0, n);
  const ConvexBody Binf = ConvexBody::unit_ball(std::numeric_limits<double>::infinity(), n);
  CHECK(ell_star(B1, 1, s).value == doctest::Approx(ell(Binf, 1, s).value).epsilon(1e-12));
  CHECK(ell(scaled(2.0, B1), 1, s).value == doctest::Approx(ell(B1, 1, s).value / 2.0).epsilon(1e-12));
  CHECK(ell_star(scaled(2.0, B1), 1, s).value == doctest::Approx(2.0 * ell_star(B1, 1, s).value).epsilon(1e-12));
  CHECK_THROWS_AS(ell(B1, 3, s), ConfigError);
  CHECK_THROWS_AS(ell(ConvexBody::unit_ball(1.0, 5), 1, s), DimensionMismatch);
}

TEST_CASE("common random numbers") {
  const int n = 8;
  const GaussianSample s(14, 4000, n);
  const ConvexBody B1 = ConvexBody::unit_ball(1.0, n);
  const ConvexBody wl = ConvexBody::lp_from_scales(1.0, Vec::LinSpaced(n, 0.9, 1.1));
  const CrnPair p = crn_pair(B1, wl, Functional::ell, s);
  CHECK(p.difference == doctest::Approx(p.a.value - p.b.value));
  CHECK(p.ratio == doctest::Approx(p.a.value / p.b.value));
  CHECK(p.difference_se < p.independent_se);
  const CrnPair same = crn_pair(B1, B1, Functional::ell, s);
  CHECK(same.difference == 0.0);
  CHECK(same.difference_se == 0.0);
}
