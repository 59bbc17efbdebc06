#include "regpos/body.hpp"
#include "regpos/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace regpos;

namespace {
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST_CASE("gauge closed forms") {
  CHECK(ConvexBody::unit_ball(1.0, 2).gauge(v2(1, 1)) == doctest::Approx(2.0).epsilon(1e-15));
  const ConvexBody E = ConvexBody::ellipsoid(v2(0.25, 1.0).asDiagonal().toDenseMatrix());
  CHECK(E.gauge(v2(2, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ConvexBody::weighted_lp(3.0, v2(1, 1)).gauge(v2(1, 1)) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-14));
  CHECK(ConvexBody::unit_ball(kInf, 3).gauge((Vec(3) << 0.5, -2.0, 1.0).finished()) == 2.0);
  // weights are v_i in (sum v_i |x_i|^p)^{1/p}
  CHECK(ConvexBody::weighted_lp(2.0, v2(4, 1)).gauge(v2(1, 0)) == doctest::Approx(2.0));
}

TEST_CASE("support closed forms") {
  CHECK(ConvexBody::unit_ball(1.0, 2).support(v2(1, 1)) == doctest::Approx(1.0));
  const ConvexBody E = ConvexBody::ellipsoid(v2(0.25, 1.0).asDiagonal().toDenseMatrix());
  CHECK(E.support(v2(1, 0)) == doctest::Approx(2.0));
  Rng rng = make_stream(3, 0);
  const Vec y = gaussian_vector(rng, 5).normalized();
  CHECK(ConvexBody::unit_ball(2.0, 5).support(y) == doctest::Approx(1.0));
}

TEST_CASE("polar families") {
  Rng rng = make_stream(4, 0);
  const ConvexBody B1 = ConvexBody::unit_ball(1.0, 6);
  const ConvexBody Binf = ConvexBody::unit_ball(kInf, 6);
  double worst = 0.0;
  for (int j = 0; j < 1000; ++j) {
    const Vec x = gaussian_vector(rng, 6);
    worst = std::max(worst, std::abs(polar(B1).gauge(x) - Binf.gauge(x)));
  }
  CHECK(worst <= 1e-9);
  const ConvexBody E = ConvexBody::ellipsoid(v2(0.25, 1.0).asDiagonal().toDenseMatrix());
  const auto q = polar(E).quadratic_form();
  REQUIRE(q.has_value());
  CHECK((*q - v2(4.0, 1.0).asDiagonal().toDenseMatrix()).norm() <= 1e-12);
}

TEST_CASE("H and V polytopes are polar to each other") {
  Rng rng = make_stream(5, 0);
  const Mat rows = gaussian_matrix(rng, 5, 3);
  const ConvexBody H = ConvexBody::polytope_h(rows);
  const ConvexBody V = ConvexBody::polytope_v(rows);
  double worst = 0.0;
  for (int j = 0; j < 300; ++j) {
    const Vec y = gaussian_vector(rng, 3);
    // support of the V-polytope is max |<v_i, y>|, the gauge of the H-polytope
    worst = std::max(worst, std::abs(V.support(y) - (rows * y).cwiseAbs().maxCoeff()));
    worst = std::max(worst, std::abs(H.gauge(y) - (rows * y).cwiseAbs().maxCoeff()));
    worst = std::max(worst, std::abs(polar(H).gauge(y) - V.gauge(y)) / V.gauge(y));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("V-polytope gauge against a brute-force segment") {
  // hull of ±(1,0), ±(0,1), ±(1,1): gauge at (1, 0.5) is 1 on the edge from (1,0) to (1,1)
  const Mat V = (Mat(3, 2) << 1, 0, 0, 1, 1, 1).finished();
  CHECK(ConvexBody::polytope_v(V).gauge(v2(1.0, 0.5)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ConvexBody::polytope_v(V).gauge(v2(-1.0, 1.0)) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("linear images") {
  const ConvexBody B2 = ConvexBody::unit_ball(2.0, 2);
  CHECK(linear_image(PositionMap::identity(2), B2).gauge(v2(0.3, 0.4)) == doctest::Approx(0.5));
  CHECK(linear_image(PositionMap::diagonal(v2(2, 0.5)), B2).gauge(v2(2, 0)) == doctest::Approx(1.0));
  Rng rng = make_stream(6, 0);
  const PositionMap T = PositionMap::from_matrix(gaussian_matrix(rng, 3, 3));
  const ConvexBody B1 = ConvexBody::unit_ball(1.0, 3);
  const ConvexBody a = polar(linear_image(T, B1));
  const ConvexBody b = linear_image(T.adjoint_inverse_map(), polar(B1));
  double worst = 0.0;
  for (int j = 0; j < 1000; ++j) {
    const Vec y = gaussian_vector(rng, 3);
    worst = std::max(worst, std::abs(a.gauge(y) - b.gauge(y)) / b.gauge(y));
  }
  CHECK(worst <= 1e-9);
  CHECK_THROWS_AS(PositionMap::from_matrix(Mat::Zero(2, 2)), DegenerateBody);
}

TEST_CASE("complexification") {
  const ConvexBody c2 = complexify(ConvexBody::unit_ball(2.0, 2));
  // top singular value of the frame [x y]
  CHECK(c2.gauge((Vec(4) << 1, 0, 0, 1).finished()) == doctest::Approx(1.0).epsilon(1e-12));
  const Vec z = (Vec(4) << 1, 2, -1, 0.5).finished();
  const Mat frame = (Mat(2, 2) << 1, -1, 2, 0.5).finished();
  const double sv = Eigen::JacobiSVD<Mat>(frame).singularValues()(0);
  CHECK(c2.gauge(z) == doctest::Approx(sv).epsilon(1e-12));
  CHECK(complexify(ConvexBody::unit_ball(2.0, 1)).gauge(v2(3, 4)) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(complexify(ConvexBody::unit_ball(1.0, 2)).gauge((Vec(4) << 1, 0, 0, 1).finished()) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(c2.symmetry().circled);
}

TEST_CASE("relative out-radius") {
  const ConvexBody B1 = ConvexBody::unit_ball(1.0, 2);
  const ConvexBody B2 = ConvexBody::unit_ball(2.0, 2);
  CHECK(relative_out_radius(B1, B1).value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(relative_out_radius(B1, B2).value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(relative_out_radius(B2, B1).value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  const ConvexBody E = ConvexBody::ellipsoid(v2(0.25, 1.0).asDiagonal().toDenseMatrix());
  const RelativeRadius rr = relative_out_radius(E, B2);
  CHECK(rr.exact);
  CHECK(rr.value == doctest::Approx(2.0));
}

TEST_CASE("radii") {
  const Radii& r1 = ConvexBody::unit_ball(1.0, 4).radii();
  CHECK(r1.r == doctest::Approx(0.5));
  CHECK(r1.R == doctest::Approx(1.0));
  const Radii& ri = ConvexBody::unit_ball(kInf, 4).radii();
  CHECK(ri.r == doctest::Approx(1.0));
  CHECK(ri.R == doctest::Approx(2.0));
  // weighted l_3 with scales w: R = || 1/w ||_{6}, r = 1/max w
  const Vec w = (Vec(3) << 1.0, 2.0, 0.5).finished();
  const Radii& r3 = ConvexBody::lp_from_scales(3.0, w).radii();
  CHECK(r3.R == doctest::Approx(std::pow(1.0 + std::pow(0.5, 6) + std::pow(2.0, 6), 1.0 / 6.0)));
  CHECK(r3.r == doctest::Approx(0.5));
  const Radii& rh = ConvexBody::polytope_h(Mat::Identity(3, 3)).radii();
  CHECK(rh.r == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rh.R == doctest::Approx(std::sqrt(3.0)).epsilon(1e-6));
}

TEST_CASE("errors") {
  const ConvexBody B = ConvexBody::unit_ball(2.0, 3);
  CHECK_THROWS_AS((void)B.gauge(Vec::Ones(2)), DimensionMismatch);
  Vec bad = Vec::Ones(3);
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)B.gauge(bad), NonFiniteInput);
  CHECK_THROWS_AS(ConvexBody::polytope_h(Mat::Ones(1, 3)), DegenerateBody);
  CHECK_THROWS_AS(ConvexBody::weighted_lp(1.0, -Vec::Ones(2)), DegenerateBody);
}
