// Command-line driver: regpos <props|ellpos|regpos|sections|lowmstar|qs|curve> [options]
#include "regpos/body_spec.hpp"
#include "regpos/experiments.hpp"
#include "regpos/gaussian.hpp"
#include "regpos/parallel.hpp"
#include "regpos/positions.hpp"
#include "regpos/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>

using namespace regpos;
using nlohmann::json;

namespace {

struct Context {
  json config = json::object();
  json params = json::object();
  BodyTable bodies;
  std::uint64_t seed = 1;
  std::string out = "out";
  bool timestamps = false;
};

template <class T>
T param(const Context& c, const char* key, T fallback) {
  if (!c.params.contains(key)) return fallback;
  try {
    return c.params.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("parameter '") + key + "' has the wrong type");
  }
}

ConvexBody body(const Context& c, const ConvexBody& fallback) {
  if (!c.config.contains("body")) return fallback;
  return body_from_json(c.config.at("body"), c.bodies);
}

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void emit(const Context& c, const std::string& stem, std::vector<ExperimentRecord> records) {
  if (c.timestamps) {
    for (auto& r : records) r.timestamp = now_utc();
  }
  write_outputs(c.out, stem, records);
  std::cout << "wrote " << c.out << "/" << stem << ".jsonl and .csv (" << records.size() << " records)\n";
}

int cmd_props(const Context& c) {
  const PropertyReport rep = run_property_suites(c.seed);
  ExperimentRecord r;
  r.experiment = "props";
  r.seed = c.seed;
  r.body = "zoo";
  int failed = 0;
  for (const auto& chk : rep.checks) {
    std::cout << (chk.passed ? "PASS " : "FAIL ") << chk.name << " residual=" << format_double(chk.residual)
              << " tol=" << format_double(chk.tolerance) << "\n";
    r.quantities.push_back(Quantity::bound(chk.name, chk.residual, false));
    r.quantities.push_back(Quantity::exact(chk.name + ".tolerance", chk.tolerance));
    failed += chk.passed ? 0 : 1;
  }
  r.params = {{"checks", rep.checks.size()}, {"failed", failed}};
  emit(c, "props", {r});
  std::cout << rep.checks.size() - failed << "/" << rep.checks.size() << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

GaussianSample sample_from(const Context& c, int n) {
  SampleOptions so;
  so.moment_match = param<bool>(c, "moment_match", true);
  so.orbit = param<bool>(c, "orbit", false);
  return GaussianSample(c.seed, param<int>(c, "samples", 20000), n, so);
}

int cmd_ellpos(const Context& c) {
  const ConvexBody K = body(c, ConvexBody::unit_ball(1.5, 16));
  const GaussianSample g = sample_from(c, K.dim());
  EllPositionOptions eo;
  const std::string mode = param<std::string>(c, "mode", "automatic");
  if (mode == "diagonal") {
    eo.mode = EllPositionOptions::Mode::diagonal;
  } else if (mode == "full") {
    eo.mode = EllPositionOptions::Mode::full;
  } else if (mode != "automatic") {
    throw ConfigError("mode must be automatic, diagonal or full");
  }
  eo.tol = param<double>(c, "tol", eo.tol);
  const EllPositionResult res = solve_ell_position(K, g, eo);
  ExperimentRecord r;
  r.experiment = "ellpos";
  r.seed = c.seed;
  r.body = json::parse(K.spec_json());
  r.params = {{"n", K.dim()}, {"samples", g.count()}, {"mode", mode}, {"tol", eo.tol}};
  const EllEstimate l2 = ell(linear_image(res.T, K), 2, g);
  r.quantities.push_back(Quantity::estimate("ell2", l2.value, l2.se));
  r.quantities.push_back(Quantity::exact("ell2_at_start", res.objective_at_start));
  r.quantities.push_back(Quantity::exact("residual", res.residual));
  r.quantities.push_back(Quantity::exact("iterations", res.iterations));
  r.quantities.push_back(Quantity::exact("converged", res.converged ? 1 : 0));
  const EllProduct prod = ell_product(linear_image(res.T, K), g);
  r.quantities.push_back(Quantity::estimate("ell_times_ell_star", prod.value, prod.se));
  r.quantities.push_back(Quantity::estimate("product_over_nlog1pn", prod.per_nlogn, prod.se / prod.value * prod.per_nlogn));
  for (int i = 0; i < K.dim(); ++i) {
    r.quantities.push_back(Quantity::exact("T_" + std::to_string(i) + "_" + std::to_string(i), res.T.matrix()(i, i)));
  }
  std::cout << "l-position: converged=" << res.converged << " iterations=" << res.iterations
            << " l2=" << format_double(l2.value) << " l*l*=" << format_double(prod.value) << "\n";
  emit(c, "ellpos", {r});
  return 0;
}

GelfandOptions gelfand_from(const Context& c) {
  GelfandOptions go;
  go.c = param<double>(c, "c", go.c);
  go.radius.probes = param<int>(c, "probes", go.radius.probes);
  go.radius.starts = param<int>(c, "starts", go.radius.starts);
  go.radius.steps = param<int>(c, "steps", go.radius.steps);
  return go;
}

RegularOptions regular_from(const Context& c) {
  RegularOptions ro;
  ro.seed = c.seed;
  ro.beta = param<double>(c, "beta", ro.beta);
  ro.tol = param<double>(c, "tol", ro.tol);
  ro.max_iter = param<int>(c, "max_iter", ro.max_iter);
  ro.samples = param<int>(c, "position_samples", ro.samples);
  return ro;
}

int cmd_regpos(const Context& c) {
  const ConvexBody K = body(c, ConvexBody::unit_ball(1.0, 32));
  const double alpha = param<double>(c, "alpha", 0.75);
  const FixedPointResult fp = find_regular_position(K, alpha, regular_from(c));
  std::vector<int> ks = param<std::vector<int>>(c, "ks", default_k_grid(K.dim()));
  const int samples = param<int>(c, "subspace_samples", 500);
  const RegularityReport rep = regularity_report(*fp.body, alpha, ks, samples, c.seed, gelfand_from(c));
  ExperimentRecord r;
  r.experiment = "regpos";
  r.seed = c.seed;
  r.body = json::parse(K.spec_json());
  r.params = {{"n", K.dim()}, {"alpha", alpha}, {"theta", fp.theta}, {"ks", ks}, {"subspace_samples", samples}};
  r.quantities.push_back(Quantity::exact("fixed_point_residual", fp.residual));
  r.quantities.push_back(Quantity::exact("fixed_point_iterations", fp.iterations));
  r.quantities.push_back(Quantity::exact("fixed_point_converged", fp.converged ? 1 : 0));
  r.quantities.push_back(Quantity::exact("balance_scale", fp.scale));
  r.quantities.push_back(Quantity::estimate("ell", fp.ell.value, fp.ell.se));
  r.quantities.push_back(Quantity::estimate("ell_star", fp.ell_star.value, fp.ell_star.se));
  r.quantities.push_back(Quantity::exact("ell_bound", fp.ell_bound));
  for (int i = 0; i < K.dim(); ++i) r.quantities.push_back(Quantity::exact("T_" + std::to_string(i), fp.T.matrix()(i, i)));
  for (std::size_t i = 0; i < rep.body.size(); ++i) {
    const auto& b = rep.body[i];
    const auto& p = rep.polar[i];
    r.quantities.push_back(Quantity::interval("body.cr_" + std::to_string(b.k), b.value, b.ci_lo, b.ci_hi));
    r.quantities.push_back(Quantity::interval("polar.cr_" + std::to_string(p.k), p.value, p.ci_lo, p.ci_hi));
  }
  r.quantities.push_back(Quantity::exact("slope_body", rep.slope_body));
  r.quantities.push_back(Quantity::exact("slope_polar", rep.slope_polar));
  r.quantities.push_back(Quantity::exact("P_emp", rep.P_emp));
  std::cout << "regular position: converged=" << fp.converged << " residual=" << format_double(fp.residual)
            << " a=" << format_double(fp.scale) << " P_emp=" << format_double(rep.P_emp) << "\n";
  emit(c, "regpos", {r});
  return 0;
}

int cmd_sections(const Context& c) {
  const ConvexBody K = body(c, ConvexBody::unit_ball(1.0, 16));
  const int n = K.dim();
  const int m = param<int>(c, "m", n / 2);
  const int count = param<int>(c, "count", 100);
  if (m < 1 || m > n || count < 1) throw ConfigError("sections: need 1 <= m <= n and count >= 1");
  RadiusOptions ro;
  ro.probes = param<int>(c, "probes", 200);
  ro.starts = param<int>(c, "starts", 8);
  ro.steps = param<int>(c, "steps", 200);
  const std::string kind = param<std::string>(c, "kind", "section");
  if (kind != "section" && kind != "projection") throw ConfigError("sections: kind must be section or projection");
  std::vector<Distance> ds(count);
  parallel_for(count, [&](int t) {
    Rng rng = make_stream(c.seed, static_cast<std::uint64_t>(t));
    const Subspace F = haar_grassmannian(rng, n, m);
    RadiusOptions rt = ro;
    rt.seed = c.seed * 1000003ULL + static_cast<std::uint64_t>(t);
    const SectionBody S = kind == "section" ? SectionBody::section(K, F) : SectionBody::projection(K, F);
    ds[t] = geometric_distance_to_ball(S, rt);
  });
  std::vector<ExperimentRecord> recs;
  for (int t = 0; t < count; ++t) {
    ExperimentRecord r;
    r.experiment = "sections";
    r.seed = c.seed;
    r.body = json::parse(K.spec_json());
    r.params = {{"n", n}, {"m", m}, {"kind", kind}, {"trial", t}};
    r.quantities.push_back(ds[t].R.exact ? Quantity::exact("R", ds[t].R.value) : Quantity::bound("R", ds[t].R.value, true));
    r.quantities.push_back(ds[t].r.exact ? Quantity::exact("r", ds[t].r.value) : Quantity::bound("r", ds[t].r.value, false));
    r.quantities.push_back(ds[t].R.exact && ds[t].r.exact ? Quantity::exact("d_G", ds[t].value)
                                                          : Quantity::bound("d_G", ds[t].value, true));
    recs.push_back(std::move(r));
  }
  emit(c, "sections", std::move(recs));
  return 0;
}

int cmd_lowmstar(const Context& c) {
  BodyTable targets;
  if (c.config.contains("body")) {
    targets.insert_or_assign("body", body(c, ConvexBody::unit_ball(2.0, 1)));
  } else {
    targets = body_zoo(param<int>(c, "n", 16), c.seed);
  }
  LowMStarOptions lo;
  lo.samples = param<int>(c, "subspace_samples", lo.samples);
  lo.gaussian_samples = param<int>(c, "samples", lo.gaussian_samples);
  lo.ks = param<std::vector<int>>(c, "ks", {});
  lo.gelfand = gelfand_from(c);
  const double bound = param<double>(c, "bound", 3.0);
  std::vector<ExperimentRecord> recs;
  int failed = 0;
  for (const auto& [name, K] : targets) {
    LowMStarSummary s = run_lowmstar_check(K, c.seed, lo);
    s.record.params["name"] = name;
    const bool ok = s.C_emp <= bound;
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS " : "FAIL ") << name << " C_emp=" << format_double(s.C_emp) << " at k=" << s.argmax_k << "\n";
    recs.push_back(std::move(s.record));
  }
  emit(c, "lowmstar", std::move(recs));
  return failed == 0 ? 0 : 1;
}

int cmd_qs(const Context& c) {
  const ConvexBody K = body(c, ConvexBody::unit_ball(1.0, 32));
  QsOptions qo;
  qo.k = param<int>(c, "k", 8);
  if (qo.k < 1 || 2 * qo.k > K.dim()) throw ConfigError("qs: need 1 <= k <= n/2");
  qo.alpha = param<double>(c, "alpha", 0.5 + 1.0 / std::log(static_cast<double>(K.dim()) / qo.k));
  qo.trials = param<int>(c, "trials", qo.trials);
  qo.c = param<double>(c, "c", qo.c);
  qo.report_samples = param<int>(c, "subspace_samples", qo.report_samples);
  qo.section_of_quotient = param<bool>(c, "section_of_quotient", true);
  qo.regular = regular_from(c);
  qo.gelfand = gelfand_from(c);
  const QsSummary s = run_qs_experiment(K, c.seed, qo);
  const bool ok = s.exceedance <= s.allowed + (s.exceedance_ci_hi - s.exceedance);
  std::cout << (ok ? "PASS " : "FAIL ") << "q90=" << format_double(s.q90) << " threshold=" << format_double(s.threshold)
            << " exceedance=" << format_double(s.exceedance) << " allowed=" << format_double(s.allowed) << "\n";
  std::vector<ExperimentRecord> recs{s.record};
  for (const auto& o : s.outcomes) {
    ExperimentRecord r;
    r.experiment = "qs_trial";
    r.seed = c.seed;
    r.body = s.record.body;
    r.params = {{"n", s.n}, {"k", s.k}, {"alpha", s.alpha}, {"trial", o.trial}};
    r.quantities.push_back(Quantity::bound("dG_qos", o.quotient_of_section, true));
    if (qo.section_of_quotient) r.quantities.push_back(Quantity::bound("dG_soq", o.section_of_quotient, true));
    r.quantities.push_back(Quantity::exact("within_threshold", o.within ? 1 : 0));
    recs.push_back(std::move(r));
  }
  emit(c, "qs", std::move(recs));
  return ok ? 0 : 1;
}

int cmd_curve(const Context& c) {
  const ConvexBody K = body(c, ConvexBody::unit_ball(1.0, 32));
  CurveOptions co;
  co.alphas = param<std::vector<double>>(c, "alphas", co.alphas);
  co.ks = param<std::vector<int>>(c, "ks", {});
  co.samples = param<int>(c, "subspace_samples", co.samples);
  co.regular = regular_from(c);
  co.gelfand = gelfand_from(c);
  std::vector<ExperimentRecord> recs = run_regularity_curve(K, c.seed, co);
  for (const auto& r : recs) {
    if (r.experiment == "curve_alpha") {
      std::cout << "alpha=" << r.params["alpha"].dump() << " P_emp=" << format_double(r.find("P_emp")->value) << "\n";
    }
  }
  emit(c, "curve", std::move(recs));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regular positions of convex bodies: oracles, positions and Monte Carlo experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "out";
  bool timestamps = false;
  app.add_option("--config", config_path, "JSON config: {\"bodies\":{...}, \"body\":..., \"params\":{...}}");
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory");
  app.add_flag("--timestamps", timestamps, "stamp records with the wall-clock time");
  const std::vector<std::pair<std::string, std::string>> subs{
      {"props", "run every property suite"},
      {"ellpos", "l-position of a body"},
      {"regpos", "regular position and its regularity report"},
      {"sections", "radii and distance to the ball of random sections"},
      {"lowmstar", "empirical low-M* constant"},
      {"qs", "random quotient-of-subspace experiment"},
      {"curve", "regularity constant as a function of alpha"}};
  for (const auto& [name, help] : subs) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Context c;
  c.seed = seed;
  c.out = out;
  c.timestamps = timestamps;
  set_threads(threads);
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config " + config_path);
      try {
        c.config = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      if (!c.config.is_object()) throw ConfigError("config must be a JSON object");
      if (c.config.contains("bodies")) c.bodies = bodies_from_json(c.config.at("bodies"));
      if (c.config.contains("params")) c.params = c.config.at("params");
      if (c.config.contains("seed") && seed_opt->count() == 0) c.seed = c.config.at("seed").get<std::uint64_t>();
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "props") return cmd_props(c);
    if (sub == "ellpos") return cmd_ellpos(c);
    if (sub == "regpos") return cmd_regpos(c);
    if (sub == "sections") return cmd_sections(c);
    if (sub == "lowmstar") return cmd_lowmstar(c);
    if (sub == "qs") return cmd_qs(c);
    if (sub == "curve") return cmd_curve(c);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
