#include "regpos/body_spec.hpp"
#include "regpos/experiments.hpp"
#include "regpos/interpolation.hpp"
#include "regpos/parallel.hpp"
#include "regpos/positions.hpp"
#include "regpos/records.hpp"
#include "regpos/regular.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace regpos;

namespace {

py::dict gelfand_dict(const GelfandEstimate& e) {
  py::dict d;
  d["k"] = e.k;
  d["value"] = e.value;
  d["ci_lo"] = e.ci_lo;
  d["ci_hi"] = e.ci_hi;
  d["level"] = e.level;
  d["clamped"] = e.clamped;
  d["upper"] = e.upper;
  d["samples"] = e.samples;
  d["exact"] = e.exact;
  return d;
}

py::list gelfand_list(const std::vector<GelfandEstimate>& v) {
  py::list l;
  for (const auto& e : v) l.append(gelfand_dict(e));
  return l;
}

std::string record_line(const ExperimentRecord& r) { return r.to_line(); }

}  // namespace

PYBIND11_MODULE(_regpos, m) {
  m.doc() = "Convex bodies, l-positions and the regular fixed-point position";
  m.attr("__version__") = version();

  py::register_exception<Error>(m, "RegposError");

  py::class_<ConvexBody>(m, "ConvexBody")
      .def_static("unit_ball", &ConvexBody::unit_ball, py::arg("p"), py::arg("n"))
      .def_static("weighted_lp", &ConvexBody::weighted_lp, py::arg("p"), py::arg("weights"))
      .def_static("lp_from_scales", &ConvexBody::lp_from_scales, py::arg("p"), py::arg("scales"))
      .def_static("ellipsoid", &ConvexBody::ellipsoid, py::arg("A"))
      .def_static("polytope_h", &ConvexBody::polytope_h, py::arg("rows"))
      .def_static("polytope_v", &ConvexBody::polytope_v, py::arg("vertices"))
      .def_static("from_json", [](const std::string& s) { return body_from_string(s); }, py::arg("text"))
      .def_property_readonly("dim", &ConvexBody::dim)
      .def("gauge", &ConvexBody::gauge, py::arg("x"))
      .def("support", &ConvexBody::support, py::arg("y"))
      .def("polar", &ConvexBody::polar)
      .def("in_radius", &ConvexBody::in_radius)
      .def("out_radius", &ConvexBody::out_radius)
      .def("spec_json", &ConvexBody::spec_json)
      .def("__repr__", [](const ConvexBody& K) { return "<ConvexBody " + K.spec_json() + ">"; });

  m.def("polar", [](const ConvexBody& K) { return polar(K); });
  m.def("scaled", &scaled, py::arg("a"), py::arg("K"));
  m.def("complexify", &complexify);
  m.def(
      "linear_image", [](const Mat& T, const ConvexBody& K) { return linear_image(PositionMap::from_matrix(T), K); },
      py::arg("T"), py::arg("K"));
  m.def(
      "interpolate", [](const ConvexBody& a, const ConvexBody& b, double theta) { return interpolate({a, b, theta}); },
      py::arg("K0"), py::arg("K1"), py::arg("theta"));
  m.def("theta_of_alpha", &theta_of_alpha);
  m.def("phi", &phi);
  m.def("body_zoo", &body_zoo, py::arg("n"), py::arg("seed") = 1, py::arg("polytopes") = false);
  m.def("set_threads", &set_threads);

  py::class_<GaussianSample>(m, "GaussianSample")
      .def(py::init([](std::uint64_t seed, int count, int dim, bool moment_match, bool orbit) {
             return GaussianSample(seed, count, dim, SampleOptions{moment_match, orbit});
           }),
           py::arg("seed"), py::arg("count"), py::arg("dim"), py::arg("moment_match") = false, py::arg("orbit") = false)
      .def_property_readonly("count", &GaussianSample::count)
      .def_property_readonly("dim", &GaussianSample::dim)
      .def_property_readonly("points", &GaussianSample::points);

  m.def(
      "ell", [](const ConvexBody& K, const GaussianSample& g, int p) {
        const EllEstimate e = ell(K, p, g);
        return py::make_tuple(e.value, e.se);
      },
      py::arg("K"), py::arg("sample"), py::arg("p") = 1);
  m.def(
      "ell_star", [](const ConvexBody& K, const GaussianSample& g, int p) {
        const EllEstimate e = ell_star(K, p, g);
        return py::make_tuple(e.value, e.se);
      },
      py::arg("K"), py::arg("sample"), py::arg("p") = 1);

  m.def(
      "ell_position",
      [](const ConvexBody& K, const GaussianSample& g, const std::string& mode, double tol) {
        EllPositionOptions o;
        o.tol = tol;
        if (mode == "diagonal") o.mode = EllPositionOptions::Mode::diagonal;
        else if (mode == "full") o.mode = EllPositionOptions::Mode::full;
        else if (mode != "automatic") throw ConfigError("mode must be automatic, diagonal or full");
        const EllPositionResult r = solve_ell_position(K, g, o);
        py::dict d;
        d["T"] = r.T.matrix();
        d["objective"] = r.objective;
        d["residual"] = r.residual;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["product"] = r.product;
        return d;
      },
      py::arg("K"), py::arg("sample"), py::arg("mode") = "automatic", py::arg("tol") = 1e-6);

  m.def(
      "find_regular_position",
      [](const ConvexBody& K, double alpha, std::uint64_t seed, int samples, double tol, int max_iter) {
        RegularOptions o;
        o.seed = seed;
        o.samples = samples;
        o.tol = tol;
        o.max_iter = max_iter;
        const FixedPointResult r = find_regular_position(K, alpha, o);
        py::dict d;
        d["T"] = r.T.diagonal_entries();
        d["theta"] = r.theta;
        d["residual"] = r.residual;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["scale"] = r.scale;
        d["body"] = *r.body;
        d["ell"] = r.ell.value;
        d["ell_star"] = r.ell_star.value;
        d["ell_bound"] = r.ell_bound;
        d["trace"] = r.trace;
        return d;
      },
      py::arg("K"), py::arg("alpha"), py::arg("seed") = 1, py::arg("samples") = 20000, py::arg("tol") = 1e-5,
      py::arg("max_iter") = 200);

  m.def(
      "random_gelfand_curve",
      [](const ConvexBody& K, const std::vector<int>& ks, int samples, std::uint64_t seed, double c) {
        GelfandOptions o;
        o.c = c;
        return gelfand_list(random_gelfand_curve(K, ks, samples, seed, o));
      },
      py::arg("K"), py::arg("ks"), py::arg("samples") = 500, py::arg("seed") = 1, py::arg("c") = 0.5);

  m.def(
      "regularity_report",
      [](const ConvexBody& Kbar, double alpha, std::vector<int> ks, int samples, std::uint64_t seed) {
        if (ks.empty()) ks = default_k_grid(Kbar.dim());
        const RegularityReport r = regularity_report(Kbar, alpha, ks, samples, seed);
        py::dict d;
        d["body"] = gelfand_list(r.body);
        d["polar"] = gelfand_list(r.polar);
        d["slope_body"] = r.slope_body;
        d["slope_polar"] = r.slope_polar;
        d["P_emp"] = r.P_emp;
        return d;
      },
      py::arg("Kbar"), py::arg("alpha"), py::arg("ks") = std::vector<int>{}, py::arg("samples") = 500,
      py::arg("seed") = 1);

  m.def(
      "property_suites",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& c : run_property_suites(seed).checks) out.append(py::make_tuple(c.name, c.residual, c.tolerance, c.passed));
        return out;
      },
      py::arg("seed") = 1);

  m.def(
      "lowmstar_check",
      [](const ConvexBody& K, std::uint64_t seed, int samples) {
        LowMStarOptions o;
        o.samples = samples;
        const LowMStarSummary s = run_lowmstar_check(K, seed, o);
        py::dict d;
        d["C_emp"] = s.C_emp;
        d["argmax_k"] = s.argmax_k;
        d["ell_star"] = s.ell_star.value;
        d["cr"] = gelfand_list(s.cr);
        d["record"] = record_line(s.record);
        return d;
      },
      py::arg("K"), py::arg("seed") = 1, py::arg("samples") = 1000);

  m.def(
      "qs_experiment",
      [](const ConvexBody& K, int k, double alpha, int trials, std::uint64_t seed, bool section_of_quotient) {
        QsOptions o;
        o.k = k;
        o.alpha = alpha;
        o.trials = trials;
        o.section_of_quotient = section_of_quotient;
        const QsSummary s = run_qs_experiment(K, seed, o);
        py::dict d;
        d["P_emp"] = s.P_emp;
        d["threshold"] = s.threshold;
        d["q50"] = s.q50;
        d["q90"] = s.q90;
        d["exceedance"] = s.exceedance;
        d["allowed"] = s.allowed;
        d["record"] = record_line(s.record);
        return d;
      },
      py::arg("K"), py::arg("k"), py::arg("alpha"), py::arg("trials") = 500, py::arg("seed") = 1,
      py::arg("section_of_quotient") = true);
}
