#include "regpos/experiments.hpp"

#include "regpos/gaussian.hpp"
#include "regpos/parallel.hpp"
#include "regpos/rng.hpp"

#include <algorithm>
#include <cmath>

namespace regpos {

namespace {

using nlohmann::json;

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const int n = static_cast<int>(v.size());
  const int j = std::clamp(static_cast<int>(std::ceil(q * n - 1e-9)), 1, n);
  return v[j - 1];
}

json body_json(const ConvexBody& K) { return json::parse(K.spec_json()); }

void add_gelfand(ExperimentRecord& r, const std::string& prefix, const GelfandEstimate& e) {
  const std::string k = std::to_string(e.k);
  r.quantities.push_back(Quantity::interval(prefix + "cr_" + k, e.value, e.ci_lo, e.ci_hi));
  r.quantities.push_back(Quantity::bound(prefix + "c_upper_" + k, e.upper, false));
  r.quantities.push_back(Quantity::exact(prefix + "level_" + k, e.level));
}

// P̄_emp with the bootstrap interval of the (body, k) entry attaining it
Quantity p_emp_quantity(const RegularityReport& rep) {
  Quantity q = Quantity::exact("P_emp", rep.P_emp);
  for (const auto* es : {&rep.body, &rep.polar}) {
    for (const auto& e : *es) {
      const double f = std::pow(static_cast<double>(e.k) / rep.n, rep.alpha);
      if (e.value * f == rep.P_emp) q = Quantity::interval("P_emp", rep.P_emp, e.ci_lo * f, e.ci_hi * f);
    }
  }
  return q;
}

}  // namespace

std::pair<double, double> wilson_interval(int x, int m, double z) {
  if (m <= 0) return {0.0, 1.0};
  const double p = static_cast<double>(x) / m;
  const double z2 = z * z;
  const double den = 1.0 + z2 / m;
  const double mid = (p + z2 / (2.0 * m)) / den;
  const double half = z * std::sqrt(p * (1.0 - p) / m + z2 / (4.0 * m * m)) / den;
  return {std::max(0.0, mid - half), std::min(1.0, mid + half)};
}

LowMStarSummary run_lowmstar_check(const ConvexBody& K, std::uint64_t seed, const LowMStarOptions& opts) {
  const int n = K.dim();
  std::vector<int> ks = opts.ks;
  if (ks.empty()) {
    for (int k = 1; k <= n; k *= 2) ks.push_back(k);
  }
  LowMStarSummary out;
  const GaussianSample g(seed, opts.gaussian_samples, n);
  out.ell_star = ell_star(K, 1, g);
  out.cr = random_gelfand_curve(K, ks, opts.samples, seed, opts.gelfand);
  for (const auto& e : out.cr) {
    const double c = std::sqrt(static_cast<double>(e.k)) * e.value / out.ell_star.value;
    if (c > out.C_emp) {
      out.C_emp = c;
      out.argmax_k = e.k;
    }
  }
  ExperimentRecord& r = out.record;
  r.experiment = "lowmstar";
  r.seed = seed;
  r.body = body_json(K);
  r.params = {{"n", n}, {"ks", ks}, {"samples", opts.samples}, {"gaussian_samples", g.count()}, {"c", opts.gelfand.c}};
  r.quantities.push_back(Quantity::estimate("ell_star", out.ell_star.value, out.ell_star.se));
  for (const auto& e : out.cr) add_gelfand(r, "", e);
  const double rel = out.ell_star.se / out.ell_star.value;
  r.quantities.push_back(Quantity::estimate("C_emp", out.C_emp, out.C_emp * rel));
  r.quantities.push_back(Quantity::exact("C_emp_argmax_k", out.argmax_k));
  return out;
}

Flag qs_flag(std::uint64_t seed, int n, int k, int trial) {
  Rng rng = make_stream(seed ^ 0x0f1a6ULL, static_cast<std::uint64_t>(trial));
  return haar_flag(rng, n, k);
}

QsSummary run_qs_experiment(const ConvexBody& K, std::uint64_t seed, const QsOptions& opts) {
  const int n = K.dim();
  const int k = opts.k;
  if (k < 1 || 2 * k > n) throw HypothesisViolated("qs experiment: need 1 <= k <= n/2");
  if (opts.trials < 1) throw ConfigError("qs experiment: trials must be positive");
  QsSummary out;
  out.n = n;
  out.k = k;
  out.alpha = opts.alpha;

  RegularOptions ro = opts.regular;
  ro.seed = seed;
  const FixedPointResult fp = find_regular_position(K, opts.alpha, ro);
  const ConvexBody& Kbar = *fp.body;
  GelfandOptions go = opts.gelfand;
  go.c = opts.c;
  const RegularityReport rep = regularity_report(Kbar, opts.alpha, default_k_grid(n), opts.report_samples, seed, go);
  out.P_emp = rep.P_emp;
  const double Rbar = rep.P_emp * std::pow(static_cast<double>(n) / k, opts.alpha);
  out.threshold = Rbar * Rbar;

  out.outcomes.resize(opts.trials);
  parallel_for(opts.trials, [&](int t) {
    const Flag f = qs_flag(seed, n, k, t);
    RadiusOptions rad = opts.radius;
    rad.seed = opts.radius.seed ^ (seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(t));
    QsOutcome& o = out.outcomes[t];
    o.trial = t;
    o.quotient_of_section = geometric_distance_to_ball(SectionBody::projection_then_section(Kbar, f.F, f.E), rad).value;
    o.section_of_quotient =
        opts.section_of_quotient ? geometric_distance_to_ball(SectionBody::general(Kbar, f.E, f.F), rad).value : 0.0;
    o.within = o.quotient_of_section <= out.threshold;
  });

  std::vector<double> qos;
  std::vector<double> soq;
  int exceed = 0;
  for (const auto& o : out.outcomes) {
    qos.push_back(o.quotient_of_section);
    soq.push_back(o.section_of_quotient);
    exceed += o.within ? 0 : 1;
  }
  out.level = std::min(1.0 - std::exp(-opts.c * k), 1.0 - 10.0 / opts.trials);
  out.q50 = quantile(qos, 0.5);
  out.q90 = quantile(qos, 0.9);
  out.q_level = quantile(qos, out.level);
  if (opts.section_of_quotient) {
    out.soq_q50 = quantile(soq, 0.5);
    out.soq_q90 = quantile(soq, 0.9);
  }
  out.exceedance = static_cast<double>(exceed) / opts.trials;
  const auto [lo, hi] = wilson_interval(exceed, opts.trials);
  out.exceedance_ci_hi = hi;
  out.allowed = 2.0 * std::exp(-opts.c * k);

  ExperimentRecord& r = out.record;
  r.experiment = "qs";
  r.seed = seed;
  r.body = body_json(K);
  r.params = {{"n", n},
              {"k", k},
              {"alpha", opts.alpha},
              {"theta", fp.theta},
              {"c", opts.c},
              {"trials", opts.trials},
              {"report_samples", opts.report_samples},
              {"position_samples", ro.samples}};
  r.quantities.push_back(Quantity::exact("fixed_point_residual", fp.residual));
  r.quantities.push_back(Quantity::exact("fixed_point_iterations", fp.iterations));
  r.quantities.push_back(Quantity::exact("balance_scale", fp.scale));
  r.quantities.push_back(p_emp_quantity(rep));
  r.quantities.push_back(Quantity::exact("threshold", out.threshold));
  const int m = opts.trials;
  auto order_ci = [&](const std::vector<double>& v, double q, const std::string& name) {
    // distribution-free interval from binomial order statistics
    const double sd = std::sqrt(m * q * (1.0 - q));
    const double lo_q = std::clamp((m * q - 1.96 * sd) / m, 0.0, 1.0);
    const double hi_q = std::clamp((m * q + 1.96 * sd + 1.0) / m, 0.0, 1.0);
    r.quantities.push_back(Quantity::interval(name, quantile(v, q), quantile(v, std::max(lo_q, 1.0 / m)), quantile(v, hi_q)));
  };
  order_ci(qos, 0.5, "dG_qos_q50");
  order_ci(qos, 0.9, "dG_qos_q90");
  order_ci(qos, out.level, "dG_qos_qlevel");
  if (opts.section_of_quotient) {
    order_ci(soq, 0.5, "dG_soq_q50");
    order_ci(soq, 0.9, "dG_soq_q90");
  }
  r.quantities.push_back(Quantity::exact("quantile_level", out.level));
  r.quantities.push_back(Quantity::interval("exceedance", out.exceedance, lo, hi));
  r.quantities.push_back(Quantity::exact("allowed_exceedance", out.allowed));
  return out;
}

std::vector<ExperimentRecord> run_regularity_curve(const ConvexBody& K, std::uint64_t seed, const CurveOptions& opts) {
  const int n = K.dim();
  const std::vector<int> ks = opts.ks.empty() ? default_k_grid(n) : opts.ks;
  std::vector<ExperimentRecord> out;
  for (double alpha : opts.alphas) {
    RegularOptions ro = opts.regular;
    ro.seed = seed;
    const FixedPointResult fp = find_regular_position(K, alpha, ro);
    const RegularityReport rep = regularity_report(*fp.body, alpha, ks, opts.samples, seed, opts.gelfand);
    for (std::size_t i = 0; i < rep.body.size(); ++i) {
      ExperimentRecord r;
      r.experiment = "curve_k";
      r.seed = seed;
      r.body = body_json(K);
      r.params = {{"n", n}, {"alpha", alpha}, {"k", rep.body[i].k}, {"samples", opts.samples}, {"c", opts.gelfand.c}};
      add_gelfand(r, "body.", rep.body[i]);
      add_gelfand(r, "polar.", rep.polar[i]);
      out.push_back(std::move(r));
    }
    ExperimentRecord r;
    r.experiment = "curve_alpha";
    r.seed = seed;
    r.body = body_json(K);
    r.params = {{"n", n}, {"alpha", alpha}, {"theta", fp.theta}, {"ks", ks}, {"samples", opts.samples}, {"c", opts.gelfand.c}};
    r.quantities.push_back(Quantity::exact("fixed_point_residual", fp.residual));
    r.quantities.push_back(Quantity::exact("fixed_point_converged", fp.converged ? 1.0 : 0.0));
    r.quantities.push_back(Quantity::exact("balance_scale", fp.scale));
    r.quantities.push_back(Quantity::estimate("ell", fp.ell.value, fp.ell.se));
    r.quantities.push_back(Quantity::estimate("ell_star", fp.ell_star.value, fp.ell_star.se));
    r.quantities.push_back(Quantity::exact("ell_bound", fp.ell_bound));
    r.quantities.push_back(Quantity::exact("slope_body", rep.slope_body));
    r.quantities.push_back(Quantity::exact("slope_polar", rep.slope_polar));
    r.quantities.push_back(p_emp_quantity(rep));
    r.quantities.push_back(Quantity::exact("P_emp_times_sqrt_alpha_minus_half", rep.P_emp * std::sqrt(alpha - 0.5)));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace regpos
