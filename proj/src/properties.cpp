#include "regpos/body_spec.hpp"
#include "regpos/experiments.hpp"
#include "regpos/gaussian.hpp"
#include "regpos/positions.hpp"
#include "regpos/rng.hpp"
#include "regpos/sphere_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace regpos {

namespace {

double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0 ? std::abs(a - b) / s : 0.0;
}

struct Suite {
  PropertyReport rep;
  void add(const std::string& name, double residual, double tol) {
    rep.checks.push_back({name, residual, tol, std::isfinite(residual) && residual <= tol});
  }
};

Mat random_spd(Rng& rng, int n, double spread) {
  const Mat Q = Subspace::from_span(gaussian_matrix(rng, n, n)).basis();
  Vec ev(n);
  for (int i = 0; i < n; ++i) ev(i) = std::pow(spread, uniform01(rng) - 0.5);
  return Q * ev.asDiagonal() * Q.transpose();
}

double scale_draw(Rng& rng) { return std::exp(2.0 * uniform01(rng) - 1.0); }

void body_checks(Suite& s, const std::string& name, const ConvexBody& K, Rng& rng, int points, bool duality) {
  const int n = K.dim();
  double hom = 0.0;
  double even = 0.0;
  double tri = 0.0;
  double mid = 0.0;
  double bracket = 0.0;
  const Radii& rad = K.radii();
  const bool exact_radii = rad.r_exact && rad.R_exact;
  for (int j = 0; j < points; ++j) {
    const Vec x = gaussian_vector(rng, n) * scale_draw(rng);
    const Vec y = gaussian_vector(rng, n) * scale_draw(rng);
    const double gx = K.gauge(x);
    const double gy = K.gauge(y);
    const double lam = scale_draw(rng) * 3.0;
    hom = std::max(hom, rel_diff(K.gauge(lam * x), lam * gx));
    even = std::max(even, rel_diff(K.gauge(-x), gx));
    tri = std::max(tri, (K.gauge(x + y) - gx - gy) / (gx + gy));
    mid = std::max(mid, (K.gauge(0.5 * (x + y)) - 0.5 * (gx + gy)) / (gx + gy));
    if (exact_radii) {
      const double nx = x.norm();
      bracket = std::max({bracket, (nx / rad.R - gx) / gx, (gx - nx / rad.r) / gx});
    }
  }
  s.add(name + ".homogeneity", hom, 1e-9);
  s.add(name + ".evenness", even, 1e-12);
  s.add(name + ".triangle", std::max(tri, 0.0), 1e-9);
  s.add(name + ".midpoint_convexity", std::max(mid, 0.0), 1e-9);
  if (exact_radii) s.add(name + ".radii_bracket", std::max(bracket, 0.0), 1e-9);
  if (duality) {
    const ConvexBody P = polar(K);
    const ConvexBody PP = polar(P);
    double dual = 0.0;
    double invol = 0.0;
    for (int j = 0; j < points; ++j) {
      const Vec y = random_direction(rng, n);
      dual = std::max(dual, rel_diff(K.support(y), P.gauge(y)));
      invol = std::max(invol, rel_diff(PP.gauge(y), K.gauge(y)));
    }
    s.add(name + ".gauge_support_duality", dual, 1e-9);
    s.add(name + ".polar_involution", invol, 1e-9);
  }
}

void al_star(Suite& s, const std::string& name, const ConvexBody& K, const GaussianSample& g) {
  const EllEstimate l = ell(K, 1, g);
  const EllEstimate ls = ell_star(K, 1, g);
  const double c = std::sqrt(std::numbers::pi / 2.0);
  const Radii& rad = K.radii();
  const double v1 = 1.0 / rad.r - c * (l.value + 3.0 * l.se);
  const double v2 = rad.R - c * (ls.value + 3.0 * ls.se);
  s.add(name + ".al_star", std::max({v1, v2, 0.0}), 0.0);
}

void bodies_suite(Suite& s, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0xb0d1);
  const int n = 8;
  BodyTable zoo = body_zoo(n, seed, true);
  zoo.insert_or_assign("vpoly", ConvexBody::polytope_v(gaussian_matrix(rng, 2 * n, n)));
  zoo.insert_or_assign("ellipsoid_full", ConvexBody::ellipsoid(random_spd(rng, n, 50.0)));
  zoo.insert_or_assign("image_B1", linear_image(PositionMap::from_matrix(gaussian_matrix(rng, n, n)), zoo.at("B1")));
  const GaussianSample g(seed, 4000, n);
  for (const auto& [name, K] : zoo) {
    const bool lp_based = K.family() == Family::polytope_h || K.family() == Family::polytope_v;
    body_checks(s, name, K, rng, lp_based ? 200 : 1000, true);
    al_star(s, name, K, g);
  }
  // one-dimensional bodies make (al*) tight
  const GaussianSample g1(seed, 20000, 1);
  al_star(s, "segment", ConvexBody::unit_ball(1.0, 1), g1);

  Mat rows3 = gaussian_matrix(rng, 5, 3);
  const ConvexBody H3 = ConvexBody::polytope_h(rows3);
  double invol = 0.0;
  for (int j = 0; j < 1000; ++j) {
    const Vec y = random_direction(rng, 3);
    invol = std::max(invol, rel_diff(polar(polar(H3)).gauge(y), H3.gauge(y)));
  }
  s.add("hpoly3.polar_involution", invol, 1e-9);

  const PositionMap T = PositionMap::from_matrix(gaussian_matrix(rng, 3, 3));
  const ConvexBody B13 = ConvexBody::unit_ball(1.0, 3);
  const ConvexBody lhs = polar(linear_image(T, B13));
  const ConvexBody rhs = linear_image(T.adjoint_inverse_map(), polar(B13));
  double lin = 0.0;
  for (int j = 0; j < 1000; ++j) {
    const Vec y = random_direction(rng, 3);
    lin = std::max(lin, rel_diff(lhs.gauge(y), rhs.gauge(y)));
  }
  s.add("linear_image.polar_identity", lin, 1e-9);

  const ConvexBody B12 = ConvexBody::unit_ball(1.0, 2);
  const ConvexBody B22 = ConvexBody::unit_ball(2.0, 2);
  s.add("relative_out_radius.B2_in_B1", std::abs(relative_out_radius(B22, B12).value - std::sqrt(2.0)), 1e-6);
  s.add("relative_out_radius.self", std::abs(relative_out_radius(B12, B12).value - 1.0), 1e-9);

  // negative control: an lp polar with unchanged scales must be caught by the duality check
  Vec w(n);
  for (int i = 0; i < n; ++i) w(i) = 1.0 + 0.25 * i;
  const ConvexBody K = ConvexBody::lp_from_scales(1.5, w);
  const ConvexBody bad = ConvexBody::lp_from_scales(3.0, w);
  double dual = 0.0;
  for (int j = 0; j < 1000; ++j) {
    const Vec y = random_direction(rng, n);
    dual = std::max(dual, rel_diff(K.support(y), bad.gauge(y)));
  }
  s.add("negative_control.corrupted_polar_detected", dual > 1e-9 ? 0.0 : 1.0, 0.0);
}

void complex_suite(Suite& s, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0xc0c0);
  const int n = 3;
  const BodyTable zoo = body_zoo(n, seed);
  for (const char* name : {"B1", "wl1.5", "ell4", "Binf"}) {
    const ConvexBody& K = zoo.at(name);
    const ConvexBody Kc = complexify(K);
    const Mat re = (Mat(2 * n, n) << Mat::Identity(n, n), Mat::Zero(n, n)).finished();
    const SectionBody proj = SectionBody::projection(Kc, Subspace::from_orthonormal(re));
    double slice = 0.0;
    double project = 0.0;
    double circled = 0.0;
    for (int j = 0; j < 100; ++j) {
      const Vec x = gaussian_vector(rng, n);
      Vec z(2 * n);
      z << x, Vec::Zero(n);
      slice = std::max(slice, rel_diff(Kc.gauge(z), K.gauge(x)));
      if (j < 30) project = std::max(project, rel_diff(proj.gauge(x), K.gauge(x)));
      const Vec y = gaussian_vector(rng, n);
      const double phi = 2.0 * std::numbers::pi * uniform01(rng);
      Vec a(2 * n);
      Vec b(2 * n);
      a << x, y;
      b << std::cos(phi) * x - std::sin(phi) * y, std::sin(phi) * x + std::cos(phi) * y;
      circled = std::max(circled, rel_diff(Kc.gauge(a), Kc.gauge(b)));
    }
    const std::string base = std::string("complexify.") + name;
    s.add(base + ".real_section", slice, 1e-12);
    s.add(base + ".real_projection", project, 1e-6);
    s.add(base + ".circled", circled, 1e-9);
  }
  const ConvexBody c12 = complexify(ConvexBody::unit_ball(1.0, 2));
  s.add("complexify.B1_2.value", std::abs(c12.gauge((Vec(4) << 1, 0, 0, 1).finished()) - std::sqrt(2.0)), 1e-9);
  const ConvexBody c1 = complexify(ConvexBody::unit_ball(2.0, 1));
  s.add("complexify.segment.value", std::abs(c1.gauge((Vec(2) << 3, 4).finished()) - 5.0), 1e-9);
}

void interpolation_suite(Suite& s, std::uint64_t seed) {
  const int n = 8;
  const BodyTable zoo = body_zoo(n, seed);
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"B1", "B2"}, {"wl1.5", "Binf"}, {"ell4", "wl3"}, {"ell100", "B1"}};
  for (const auto& [a, b] : pairs) {
    for (double th : {0.25, 0.5, 0.8}) {
      const PropertyReport r = property_suite({zoo.at(a), zoo.at(b), th}, seed, 500);
      for (const auto& c : r.checks) {
        s.rep.checks.push_back({"interpolation." + a + "|" + b + "@" + format_double(th) + "." + c.name, c.residual,
                                c.tolerance, c.passed});
      }
    }
  }
  Rng rng = make_stream(seed, 0x1a7e);
  const ConvexBody B2 = ConvexBody::unit_ball(2.0, n);
  const RadiusOptions ro{200, 8, 200, seed};
  for (const char* name : {"ell100", "B1", "wl3"}) {
    double worst = 0.0;
    for (int j = 0; j < 5; ++j) {
      const Subspace E = haar_grassmannian(rng, n, 5);
      const ConvexBody& L = zoo.at(name);
      const double th = 0.5;
      const double lhs = out_radius(SectionBody::section(interpolate({L, B2, th}), E), ro).value;
      const double rhs = std::pow(out_radius(SectionBody::section(L, E), ro).value, 1.0 - th);
      worst = std::max(worst, (rhs - lhs) / rhs);
    }
    s.add(std::string("interpolation.section_lower_bound.") + name, std::max(worst, 0.0), 1e-4);
  }
}

void subspace_suite(Suite& s, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0x5b5);
  double ortho = 0.0;
  double idem = 0.0;
  double sym = 0.0;
  for (int j = 0; j < 50; ++j) {
    const int n = 2 + static_cast<int>(uniform01(rng) * 15);
    const int m = 1 + static_cast<int>(uniform01(rng) * n);
    const Subspace E = haar_grassmannian(rng, n, std::min(m, n));
    const Mat P = E.projector();
    ortho = std::max(ortho, E.orthonormality_residual());
    idem = std::max(idem, (P * P - P).cwiseAbs().maxCoeff());
    sym = std::max(sym, (P - P.transpose()).cwiseAbs().maxCoeff());
  }
  s.add("subspace.orthonormality", ortho, 1e-12);
  s.add("subspace.projector_idempotent", idem, 1e-10);
  s.add("subspace.projector_symmetric", sym, 1e-12);

  double dim_err = 0.0;
  double meet = 0.0;
  double perp = 0.0;
  for (int j = 0; j < 20; ++j) {
    const int n = 16;
    const int k = j % 2 == 0 ? 2 : 4;
    const Flag f = haar_flag(rng, n, k);
    const Subspace E2 = sum(f.F.complement(), f.E);
    const Subspace I = intersection(f.F, E2);
    dim_err = std::max({dim_err, std::abs(E2.dim() - (n - k + 1)) * 1.0, std::abs(I.dim() - f.E.dim()) * 1.0});
    meet = std::max({meet, f.E.containment_residual(I), I.containment_residual(f.E)});
    perp = std::max(perp, f.F.containment_residual(E2.complement()));
  }
  s.add("flag.E2_dimension_and_meet_dimension", dim_err, 0.0);
  s.add("flag.E1_meet_E2_is_E", meet, 1e-8);
  s.add("flag.E1_contains_E2_perp", perp, 1e-8);

  double eig = 0.0;
  for (int j = 0; j < 20; ++j) {
    const int n = 8;
    const Mat A = random_spd(rng, n, 100.0);
    const Subspace F = haar_grassmannian(rng, n, 5);
    const Mat Q = F.basis().transpose() * A * F.basis();
    const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(Q).eigenvalues()(0);
    eig = std::max(eig, rel_diff(out_radius(SectionBody::section(ConvexBody::ellipsoid(A), F)).value, 1.0 / std::sqrt(lmin)));
  }
  s.add("section.ellipsoid_out_radius", eig, 1e-10);

  const BodyTable zoo = body_zoo(8, seed);
  const RadiusOptions ro{100, 4, 100, seed};
  double below = 0.0;
  double ball = 0.0;
  for (const auto& [name, K] : zoo) {
    for (int j = 0; j < 3; ++j) {
      const Subspace F = haar_grassmannian(rng, 8, 4 + j);
      const Distance d = geometric_distance_to_ball(SectionBody::section(K, F), ro);
      below = std::max(below, 1.0 - d.R.value / d.r.value);
      if (name == "B2") ball = std::max(ball, std::abs(d.value - 1.0));
    }
  }
  s.add("distance.at_least_one", std::max(below, 0.0), 1e-12);
  s.add("distance.ball_sections", ball, 1e-9);

  // perp identity on 50 admissible triples
  const std::vector<std::string> names{"ellipsoid", "B1", "wl1.5", "Binf", "ell100"};
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 4 + t % 5;
    const int m2 = 2 + static_cast<int>(uniform01(rng) * (n - 2));
    const int extra = 1 + static_cast<int>(uniform01(rng) * std::min(m2, n - 1));
    const Subspace E2 = haar_grassmannian(rng, n, m2);
    const Subspace E1 = sum(E2.complement(), haar_grassmannian(rng, n, std::min(extra, m2)));
    const std::string& which = names[t % names.size()];
    const ConvexBody A = which == "ellipsoid" ? ConvexBody::ellipsoid(random_spd(rng, n, 20.0)) : body_zoo(n, seed).at(which);
    worst = std::max(worst, perp_identity_check(A, E1, E2, rng, 100));
  }
  s.add("perp_identity.50_triples", worst, 1e-6);
}

void gaussian_suite(Suite& s, std::uint64_t seed) {
  const int n = 8;
  const BodyTable zoo = body_zoo(n, seed);
  const GaussianSample g(seed, 20000, n);
  const double l1 = ell(zoo.at("B1"), 1, g).value;
  const double l2 = ell(zoo.at("B2"), 1, g).value;
  const double li = ell(zoo.at("Binf"), 1, g).value;
  s.add("gaussian.monotone_in_inclusion", std::max({l2 - l1, li - l2, 0.0}), 0.0);
  const EllEstimate m2 = ell_star(zoo.at("B2"), 1, g);
  s.add("gaussian.ell_star_ball", std::abs(m2.value - expected_gaussian_norm(n)) / m2.se, 3.0);

  Rng rng = make_stream(seed, 0x9a55);
  const GaussianSample g4(seed + 1, 20000, 4);
  double sec = 0.0;
  double proj = 0.0;
  for (const char* name : {"B1", "wl1.5", "ell100"}) {
    const ConvexBody& K = zoo.at(name);
    const EllEstimate lk = ell(K, 1, g);
    const EllEstimate lsk = ell_star(K, 1, g);
    const Subspace E = haar_grassmannian(rng, n, 4);
    const EllEstimate ls = ell(SectionBody::section(K, E).as_body(), 1, g4);
    const EllEstimate lp = ell_star(SectionBody::projection(K, E).as_body(), 1, g4);
    sec = std::max(sec, (ls.value - lk.value) / std::hypot(ls.se, lk.se));
    proj = std::max(proj, (lp.value - lsk.value) / std::hypot(lp.se, lsk.se));
  }
  s.add("gaussian.section_decreases_ell", std::max(sec, 0.0), 3.0);
  s.add("gaussian.projection_decreases_ell_star", std::max(proj, 0.0), 3.0);
}

void positions_suite(Suite& s, std::uint64_t seed) {
  const int n = 8;
  const BodyTable zoo = body_zoo(n, seed);
  const GaussianSample orbit(seed, 8192, n, {true, true});
  Rng rng = make_stream(seed, 0x9051);
  EllPositionOptions full;
  full.mode = EllPositionOptions::Mode::full;
  full.compute_product = false;
  for (const char* name : {"B1", "wl1.5", "wl3"}) {
    const ConvexBody& K = zoo.at(name);
    const EllPositionResult r = solve_ell_position(K, orbit, full);
    const Mat& T = r.T.matrix();
    Mat off = T;
    off.diagonal().setZero();
    s.add(std::string("positions.commutes_with_sign_flips.") + name, off.cwiseAbs().maxCoeff() / T.norm(), 1e-6);
    const double f0 = ell2_of_image(K, r.T, orbit);
    double worst = 0.0;
    for (int j = 0; j < 20; ++j) {
      Mat S = gaussian_matrix(rng, n, n);
      S = 0.5 * (S + S.transpose()).eval();
      S.diagonal().array() -= S.trace() / n;
      const PositionMap P = PositionMap::from_matrix(T * PositionMap::exp_symmetric(1e-2 * S).matrix());
      worst = std::max(worst, (f0 - ell2_of_image(K, P, orbit)) / f0);
    }
    s.add(std::string("positions.local_optimality.") + name, std::max(worst, 0.0), 1e-12);
  }
  const ConvexBody K = ConvexBody::unit_ball(1.5, 6);
  const Mat U = Subspace::from_span(gaussian_matrix(rng, 6, 6)).basis();
  const ConvexBody UK = linear_image(PositionMap::from_matrix(U), K);
  const GaussianSample plain(seed, 20000, 6, {true, false});
  const EllPositionResult a = solve_ell_position(K, plain, full);
  const EllPositionResult b = solve_ell_position(UK, plain, full);
  const EllEstimate ea = ell(linear_image(a.T, K), 2, plain);
  const EllEstimate eb = ell(linear_image(b.T, UK), 2, plain);
  s.add("positions.orthogonal_invariance", std::abs(ea.value - eb.value) / std::hypot(ea.se, eb.se), 3.0);
}

void regular_suite(Suite& s, std::uint64_t seed) {
  double expo = 0.0;
  for (double a : {0.6, 0.75, 1.0, 2.0, 10.0}) expo = std::max(expo, std::abs(1.0 / (1.0 - theta_of_alpha(a)) - 2.0 * a) / (2.0 * a));
  s.add("regular.exponent_identity", expo, 1e-15);

  const int n = 8;
  const BodyTable zoo = body_zoo(n, seed);
  RegularOptions ro;
  ro.samples = 8192;
  ro.seed = seed;
  const FixedPointResult fp = find_regular_position(zoo.at("wl1.5"), 1.0, ro);
  s.add("regular.converged", fp.converged ? fp.residual : std::numeric_limits<double>::infinity(), ro.tol);
  const GaussianSample sample(seed, ro.samples, n, ro.sample);
  const ConvexBody J = interpolate({linear_image(fp.T, zoo.at("wl1.5")), ConvexBody::unit_ball(2.0, n), fp.theta});
  EllPositionOptions eo;
  eo.mode = EllPositionOptions::Mode::diagonal;
  eo.compute_product = false;
  eo.tol = 1e-9;
  const EllPositionResult cert = solve_ell_position(J, sample, eo);
  s.add("regular.fixed_point_certificate", cert.log_T.cwiseAbs().maxCoeff(), 1e-4);
  s.add("regular.balance", std::abs(fp.ell.value - fp.ell_star.value) / std::hypot(fp.ell.se, fp.ell_star.se), 3.0);
  s.add("regular.det_one", std::abs(fp.T.determinant() - 1.0), 1e-12);

  Vec v(2);
  v << 4.0, 1.0;
  RegularOptions r2;
  r2.samples = 8192;
  const FixedPointResult e = find_regular_position(ConvexBody::weighted_lp(2.0, v), 1.0, r2);
  s.add("regular.ellipsoid_fixed_point",
        std::max(std::abs(std::log(e.T.matrix()(0, 0) / std::sqrt(2.0))), std::abs(std::log(e.T.matrix()(1, 1) * std::sqrt(2.0)))),
        1e-4);

  const std::vector<int> ks = default_k_grid(n);
  GelfandOptions go;
  go.radius = {50, 2, 100, seed};
  const auto ball = random_gelfand_curve(zoo.at("B2"), ks, 100, seed, go);
  double one = 0.0;
  for (const auto& c : ball) one = std::max(one, std::abs(c.value - 1.0));
  s.add("gelfand.ball_is_one", one, 1e-12);
  const auto b1 = random_gelfand_curve(zoo.at("B1"), ks, 100, seed, go);
  double mono = 0.0;
  double floor = 0.0;
  for (std::size_t i = 0; i < b1.size(); ++i) {
    if (i > 0) mono = std::max(mono, b1[i].value - b1[i - 1].value);
    floor = std::max(floor, zoo.at("B1").in_radius() - b1[i].upper);
  }
  s.add("gelfand.monotone_in_k", std::max(mono, 0.0), 0.0);
  s.add("gelfand.above_in_radius", std::max(floor, 0.0), 1e-12);
}

void records_suite(Suite& s, std::uint64_t seed) {
  ExperimentRecord r;
  r.experiment = "roundtrip";
  r.seed = seed ^ 0xffffffffffffULL;
  r.body = nlohmann::json::parse(ConvexBody::unit_ball(1.5, 3).spec_json());
  r.params = {{"n", 3}, {"alpha", 0.1 + 0.2}, {"tiny", 1e-300}};
  r.quantities = {Quantity::estimate("third", 1.0 / 3.0, std::nextafter(0.1, 1.0)), Quantity::exact("neg_zero", -0.0),
                  Quantity::bound("inf", std::numeric_limits<double>::infinity(), true),
                  Quantity::exact("nan", std::numeric_limits<double>::quiet_NaN())};
  const ExperimentRecord back = ExperimentRecord::from_line(r.to_line());
  s.add("records.roundtrip", back == r && back.to_line() == r.to_line() ? 0.0 : 1.0, 0.0);
}

}  // namespace

PropertyReport run_property_suites(std::uint64_t seed) {
  Suite s;
  bodies_suite(s, seed);
  complex_suite(s, seed);
  interpolation_suite(s, seed);
  subspace_suite(s, seed);
  gaussian_suite(s, seed);
  positions_suite(s, seed);
  regular_suite(s, seed);
  records_suite(s, seed);
  return s.rep;
}

}  // namespace regpos
