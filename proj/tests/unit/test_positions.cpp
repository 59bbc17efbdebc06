#include "regpos/positions.hpp"
#include "regpos/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace regpos;

namespace {
double geomean(const Vec& v) { return std::exp(v.array().log().mean()); }
}  // namespace

TEST_CASE("diagonal ellipsoid has the AM-GM position") {
  // sum v_i / t_i^2 with prod t_i = 1 is minimal at t_i proportional to sqrt(v_i)
  const Vec v = (Vec(5) << 0.5, 1.0, 2.0, 3.0, 8.0).finished();
  const ConvexBody K = ConvexBody::ellipsoid(v.asDiagonal().toDenseMatrix());
  const GaussianSample s(1, 4000, 5, {true, false});
  for (auto mode : {EllPositionOptions::Mode::diagonal, EllPositionOptions::Mode::full}) {
    EllPositionOptions o;
    o.mode = mode;
    o.tol = 1e-8;
    const EllPositionResult r = solve_ell_position(K, s, o);
    INFO("residual " << r.residual << " iterations " << r.iterations);
    CHECK(r.converged);
    const Vec expect = v.cwiseSqrt() / geomean(v.cwiseSqrt());
    CHECK((r.T.matrix() - Mat(expect.asDiagonal())).norm() <= 1e-6);
    CHECK(r.T.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.objective == doctest::Approx(std::sqrt(5.0 * geomean(v))).epsilon(1e-9));
  }
}

TEST_CASE("full ellipsoid goes to a multiple of A^{1/2}") {
  Rng rng = make_stream(2, 0);
  const int n = 4;
  const Mat G = gaussian_matrix(rng, n, n);
  const Mat A = G * G.transpose() + Mat::Identity(n, n);
  const GaussianSample s(2, 4000, n, {true, false});
  EllPositionOptions o;
  o.mode = EllPositionOptions::Mode::full;
  o.tol = 1e-10;
  const EllPositionResult r = solve_ell_position(ConvexBody::ellipsoid(A), s, o);
  const Eigen::SelfAdjointEigenSolver<Mat> es(A);
  Mat root = es.operatorSqrt();
  root /= std::pow(root.determinant(), 1.0 / n);
  CHECK((r.T.matrix() - root).norm() <= 1e-6);
}

TEST_CASE("B_1 is in l-position on an orbit-closed sample") {
  const int n = 8;
  const GaussianSample s(3, 4096, n, {true, true});
  const EllPositionResult r = solve_ell_position(ConvexBody::unit_ball(1.0, n), s);
  CHECK((r.T.matrix() - Mat::Identity(n, n)).norm() <= 1e-6);
  CHECK(r.objective == doctest::Approx(r.objective_at_start).epsilon(1e-9));
}

TEST_CASE("objective is the sample l_2 of the image") {
  const int n = 4;
  const GaussianSample s(4, 2000, n);
  const ConvexBody B1 = ConvexBody::unit_ball(1.0, n);
  const PositionMap T = PositionMap::diagonal((Vec(4) << 2, 1, 1, 0.5).finished());
  double acc = 0.0;
  for (int j = 0; j < s.count(); ++j) {
    const Vec g = s.points().col(j);
    const double v = T.apply_inverse(g).lpNorm<1>();
    acc += v * v;
  }
  CHECK(ell2_of_image(B1, T, s) == doctest::Approx(std::sqrt(acc / s.count())).epsilon(1e-12));
}

TEST_CASE("ell product and balance scale") {
  const int n = 6;
  const GaussianSample s(5, 5000, n);
  const ConvexBody B2 = ConvexBody::unit_ball(2.0, n);
  const EllProduct p = ell_product(B2, s);
  CHECK(p.value == doctest::Approx(p.ell.value * p.ell_star.value));
  CHECK(p.per_nlogn == doctest::Approx(p.value / (n * std::log(1.0 + n))));
  CHECK(balance_scale(B2, 0.5, s) == doctest::Approx(1.0).epsilon(1e-12));
  // [a B_2, B_2]_θ = a^{1-θ} B_2, so balancing 3 B_2 needs a = 1/3
  CHECK(balance_scale(scaled(3.0, B2), 0.4, s) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}
