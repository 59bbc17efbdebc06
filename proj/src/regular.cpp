#include "regpos/regular.hpp"

#include "regpos/interpolation.hpp"
#include "regpos/parallel.hpp"
#include "regpos/positions.hpp"
#include "regpos/rng.hpp"
#include "regpos/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace regpos {

namespace {

EllPositionResult inner_solve(const ConvexBody& K, const Vec& t, double theta, const GaussianSample& sample,
                              const Mat* start_log, double tol) {
  const ConvexBody ellipse = ConvexBody::lp_from_scales(2.0, t);  // T^{-1} B_2
  const ConvexBody J = interpolate({K, ellipse, theta});
  EllPositionOptions o;
  o.mode = EllPositionOptions::Mode::diagonal;
  o.tol = tol;
  o.compute_product = false;
  if (start_log) o.start_log = *start_log;
  return solve_ell_position(J, sample, o);
}

void require_tractable(const ConvexBody& K) {
  if (!K.lp_form() || !K.symmetry().sign_flips) {
    throw NotTractable("regular position needs an unconditional weighted lp body or diagonal ellipsoid");
  }
}

// smallest order statistic exceeded by at most a `level` fraction of the values
double upper_quantile(std::vector<double> v, double level) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  int j = static_cast<int>(std::ceil(n * (1.0 - level) - 1e-9));
  j = std::clamp(j, 1, static_cast<int>(v.size()));
  return v[j - 1];
}

Mat haar_frame(Rng& rng, int n) {
  for (;;) {
    try {
      return Subspace::from_span(gaussian_matrix(rng, n, n)).basis();
    } catch (const DegenerateBody&) {
    }
  }
}

}  // namespace

PositionMap fixed_point_map(const ConvexBody& K, const PositionMap& T, double theta, const GaussianSample& sample,
                            const Mat* start_log, double inner_tol) {
  require_tractable(K);
  if (T.dim() != K.dim()) throw DimensionMismatch("fixed_point_map: map and body dimensions differ");
  if (!T.is_diagonal()) throw HypothesisViolated("fixed_point_map: T must be diagonal");
  return inner_solve(K, T.diagonal_entries(), theta, sample, start_log, inner_tol).T;
}

FixedPointResult find_regular_position(const ConvexBody& K, double alpha, const RegularOptions& opts) {
  require_tractable(K);
  const int n = K.dim();
  FixedPointResult out;
  out.alpha = alpha;
  out.theta = theta_of_alpha(alpha);
  if (!(opts.beta > 0.0 && opts.beta <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
  const GaussianSample sample(opts.seed, opts.samples, n, opts.sample);

  Vec lt = Vec::Zero(n);
  if (opts.start.size() != 0) {
    if (opts.start.size() != n || (opts.start.array() <= 0.0).any()) {
      throw DimensionMismatch("find_regular_position: bad starting diagonal");
    }
    lt = opts.start.array().log().matrix();
    lt.array() -= lt.mean();
  }
  Mat warm;
  bool have_warm = false;
  int it = 0;
  for (;; ++it) {
    const Vec t = lt.array().exp().matrix();
    const double inner_tol = std::clamp(1e-3 * (have_warm ? out.residual : 1.0), 1e-9, 1e-6);
    const EllPositionResult r = inner_solve(K, t, out.theta, sample, have_warm ? &warm : nullptr, inner_tol);
    const Vec lf = r.log_T.diagonal();
    out.residual = (lt - lf).cwiseAbs().maxCoeff();
    out.trace.push_back(out.residual);
    warm = r.log_T;
    have_warm = true;
    if (out.residual <= opts.tol) {
      out.converged = true;
      break;
    }
    if (it >= opts.max_iter) break;
    lt = (1.0 - opts.beta) * lt + opts.beta * lf;
    lt.array() -= lt.mean();
  }
  out.iterations = it;
  out.T = PositionMap::diagonal(lt.array().exp().matrix()).normalized();

  const ConvexBody TK = linear_image(out.T, K);
  out.scale = balance_scale(TK, out.theta, sample);
  out.body = scaled(out.scale, TK);
  const ConvexBody J = interpolate({*out.body, ConvexBody::unit_ball(2.0, n), out.theta});
  out.ell = ell(J, 1, sample);
  out.ell_star = ell_star(J, 1, sample);
  out.ell_bound = out.theta > 0.0 ? std::sqrt(2.0 * n * phi(out.theta)) : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<GelfandEstimate> random_gelfand_curve(const ConvexBody& K, const std::vector<int>& ks, int samples,
                                                  std::uint64_t seed, const GelfandOptions& opts) {
  const int n = K.dim();
  if (samples < 100) throw HypothesisViolated("random Gelfand numbers need at least 100 samples");
  if (!(opts.c > 0.0)) throw ConfigError("c must be positive");
  const std::set<int> uniq(ks.begin(), ks.end());
  const std::vector<int> grid(uniq.begin(), uniq.end());
  if (grid.empty() || grid.front() < 1 || grid.back() > n) throw DimensionMismatch("random_gelfand: need 1 <= k <= n");
  const int nk = static_cast<int>(grid.size());

  Mat R(samples, nk);
  std::vector<char> exact(static_cast<std::size_t>(samples) * nk, 0);
  parallel_for(samples, [&](int s) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(s));
    const Mat frame = haar_frame(rng, n);
    RadiusOptions ro = opts.radius;
    ro.seed = opts.radius.seed ^ (seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(s));
    Vec prev;
    for (int i = 0; i < nk; ++i) {
      const Subspace F = Subspace::from_orthonormal(frame.leftCols(n - grid[i] + 1));
      const SectionBody S = SectionBody::section(K, F);
      std::vector<Vec> warm;
      if (prev.size() == n) warm.push_back(F.basis().transpose() * prev);
      const RadiusEstimate est = out_radius(S, ro, warm);
      R(s, i) = est.value;
      exact[static_cast<std::size_t>(s) * nk + i] = est.exact ? 1 : 0;
      if (est.point.size() == F.dim()) prev = F.basis() * est.point;
    }
    // F_k shrinks as k grows, so R(K ∩ F_k) is nonincreasing along the chain
    for (int i = nk - 2; i >= 0; --i) R(s, i) = std::max(R(s, i), R(s, i + 1));
  });

  std::vector<GelfandEstimate> out;
  Rng boot = make_stream(seed, 0xb0075ULL);
  std::uniform_int_distribution<int> pick(0, samples - 1);
  for (int i = 0; i < nk; ++i) {
    GelfandEstimate e;
    e.k = grid[i];
    e.samples = samples;
    const double raw = std::exp(-opts.c * e.k);
    const double floor = 10.0 / samples;
    e.clamped = raw < floor;
    e.level = std::max(raw, floor);
    std::vector<double> v(samples);
    for (int s = 0; s < samples; ++s) v[s] = R(s, i);
    e.value = upper_quantile(v, e.level);
    e.upper = *std::min_element(v.begin(), v.end());
    e.exact = true;
    for (int s = 0; s < samples; ++s) e.exact = e.exact && exact[static_cast<std::size_t>(s) * nk + i];
    std::vector<double> qs(std::max(opts.bootstrap, 1));
    std::vector<double> rs(samples);
    for (double& q : qs) {
      for (double& x : rs) x = v[pick(boot)];
      q = upper_quantile(rs, e.level);
    }
    std::sort(qs.begin(), qs.end());
    const int m = static_cast<int>(qs.size());
    e.ci_lo = qs[std::clamp(static_cast<int>(std::floor(0.025 * m)), 0, m - 1)];
    e.ci_hi = qs[std::clamp(static_cast<int>(std::ceil(0.975 * m)) - 1, 0, m - 1)];
    out.push_back(e);
  }
  return out;
}

GelfandEstimate random_gelfand(const ConvexBody& K, int k, int samples, std::uint64_t seed, const GelfandOptions& opts) {
  return random_gelfand_curve(K, {k}, samples, seed, opts).front();
}

double gelfand_upper(const ConvexBody& K, int k, int samples, std::uint64_t seed, const GelfandOptions& opts) {
  return random_gelfand(K, k, samples, seed, opts).upper;
}

std::vector<int> default_k_grid(int n) {
  std::vector<int> ks;
  for (int k = 1; 2 * k <= n; k *= 2) ks.push_back(k);
  if (ks.empty()) ks.push_back(1);
  return ks;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = std::min(x.size(), y.size());
  if (m < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

RegularityReport regularity_report(const ConvexBody& Kbar, double alpha, const std::vector<int>& ks, int samples,
                                   std::uint64_t seed, const GelfandOptions& opts) {
  RegularityReport rep;
  rep.n = Kbar.dim();
  rep.alpha = alpha;
  rep.body = random_gelfand_curve(Kbar, ks, samples, seed, opts);
  rep.polar = random_gelfand_curve(polar(Kbar), ks, samples, seed, opts);
  auto fit = [&](const std::vector<GelfandEstimate>& es) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& e : es) {
      x.push_back(std::log(static_cast<double>(rep.n) / e.k));
      y.push_back(std::log(e.value));
      rep.P_emp = std::max(rep.P_emp, e.value * std::pow(static_cast<double>(e.k) / rep.n, alpha));
    }
    return ls_slope(x, y);
  };
  rep.slope_body = fit(rep.body);
  rep.slope_polar = fit(rep.polar);
  return rep;
}

}  // namespace regpos
