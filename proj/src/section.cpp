#include "regpos/section.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace regpos {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* mode_name(SectionBody::Mode m) {
  switch (m) {
    case SectionBody::Mode::section: return "section";
    case SectionBody::Mode::projection: return "projection";
    case SectionBody::Mode::general: return "general";
  }
  return "general";
}

class SectionImpl final : public BodyImpl {
 public:
  explicit SectionImpl(SectionBody s) : s_(std::move(s)) {}

  int dim() const override { return s_.dim(); }
  Family family() const override { return Family::section; }
  bool exact() const override { return s_.parent().exact(); }
  double gauge(const Vec& u, Vec* g) const override { return s_.gauge_with(u, g); }
  double support(const Vec& y, Vec* pt) const override {
    if (pt) return BodyImpl::support(y, pt);
    return s_.support(y);
  }
  std::optional<Mat> quadratic_form() const override { return s_.quadratic_form(); }
  std::optional<Radii> exact_radii() const override {
    if (dim() == 1) {
      Radii out;
      out.r = out.R = 1.0 / s_.gauge(Vec::Ones(1));
      out.r_exact = out.R_exact = true;
      return out;
    }
    auto q = quadratic_form();
    if (!q) return std::nullopt;
    Eigen::SelfAdjointEigenSolver<Mat> es(*q, Eigen::EigenvaluesOnly);
    Radii out;
    out.r = 1.0 / std::sqrt(es.eigenvalues().maxCoeff());
    out.R = 1.0 / std::sqrt(es.eigenvalues().minCoeff());
    out.r_exact = out.R_exact = true;
    return out;
  }
  std::string spec_json() const override {
    nlohmann::json j{{"family", "section"},
                     {"mode", mode_name(s_.mode())},
                     {"carrier_dim", s_.dim()},
                     {"parent", nlohmann::json::parse(s_.parent().spec_json())}};
    return j.dump();
  }

 private:
  SectionBody s_;
};

std::vector<Vec> candidate_starts(const SectionBody& S, Rng& rng, const RadiusOptions& opts, bool maximize,
                                  const std::function<double(const Vec&)>& proxy) {
  const int m = S.dim();
  const Mat& B = S.carrier().basis();
  std::vector<Vec> dirs;
  std::vector<double> vals;
  auto add = [&](Vec u) {
    const double nu = u.norm();
    if (!(nu > 1e-12)) return;
    u /= nu;
    vals.push_back(proxy(u));
    dirs.push_back(std::move(u));
  };
  // lifts of coordinate axes: extreme directions of lp-type bodies
  if (S.parent().lp_form()) {
    for (Eigen::Index i = 0; i < B.rows(); ++i) add(B.row(i).transpose());
  }
  for (int i = 0; i < opts.probes; ++i) add(random_direction(rng, m));
  std::vector<int> idx(dirs.size());
  std::iota(idx.begin(), idx.end(), 0);
  const int keep = std::min<int>(std::max(opts.starts, 1), static_cast<int>(idx.size()));
  std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(), [&](int a, int b) {
    return maximize ? vals[a] > vals[b] : vals[a] < vals[b];
  });
  std::vector<Vec> out;
  for (int i = 0; i < keep; ++i) out.push_back(dirs[idx[i]]);
  return out;
}

// Majorize-minimize for || s ∘ x ||_p, p in [1, 2), over x = B_E u + W w with |u| = 1.
// Each step minimizes the quadratic majorizer sum c_i x_i^2 by one inverse-iteration step
// on its Schur complement.
SphereExtremum mm_descent(const SectionBody& S, const LpForm& f, Vec u, int steps) {
  const Mat& BE = S.carrier().basis();
  const Mat& W = S.fiber();
  const Eigen::Index e = BE.cols();
  const Eigen::Index g = e + W.cols();
  Mat B(BE.rows(), g);
  B << BE, W;
  const double p = f.p;
  const Vec sp = f.scales.array().pow(p).matrix();
  auto true_gauge = [&](const Vec& x) {
    const Vec y = f.scales.cwiseProduct(x).cwiseAbs();
    const double m = y.maxCoeff();
    if (m == 0.0) return 0.0;
    if (p == 1.0) return y.sum();
    return m * std::pow((y / m).array().pow(p).sum(), 1.0 / p);
  };

  Vec x = BE * u;
  SphereExtremum best;
  best.value = true_gauge(x);
  best.point = u;
  best.evaluations = 1;
  double eps = 0.1 * x.cwiseAbs().maxCoeff();
  Vec rhs = Vec::Zero(g);
  Mat Bs(B.rows(), g);
  Mat M(g, g);
  Eigen::LDLT<Mat, Eigen::Lower> ldlt(g);
  double checkpoint = best.value;
  for (int it = 0; it < steps; ++it) {
    const Vec c = sp.cwiseProduct((x.array().square() + eps * eps).pow(0.5 * (p - 2.0)).matrix());
    Bs = c.cwiseSqrt().asDiagonal() * B;
    M.setZero();
    M.selfadjointView<Eigen::Lower>().rankUpdate(Bs.transpose());
    rhs.head(e) = u;
    ldlt.compute(M);
    const Vec ab = ldlt.solve(rhs);
    const double na = ab.head(e).norm();
    if (!(na > 0.0) || !ab.allFinite()) break;
    const Vec un = ab.head(e) / na;
    x = B * (ab / na);
    const double val = true_gauge(x);
    ++best.evaluations;
    if (val < best.value) {
      best.value = val;
      best.point = un;
    }
    const double move = std::min((un - u).norm(), (un + u).norm());
    u = un;
    const double floor = 1e-9 * x.cwiseAbs().maxCoeff();
    if (move < 1e-9 && eps <= floor) break;
    eps = std::max(0.3 * eps, floor);
    if (it % 10 == 9) {
      if (eps <= floor && checkpoint - best.value <= 1e-8 * best.value) break;
      checkpoint = best.value;
    }
  }
  return best;
}

double lq_value(const Vec& s, const Vec& x, double q, Vec* grad) {
  const Vec y = s.cwiseProduct(x);
  const double m = y.cwiseAbs().maxCoeff();
  if (m == 0.0) {
    if (grad) *grad = Vec::Zero(x.size());
    return 0.0;
  }
  const Vec r = y.cwiseAbs() / m;
  const double v = m * std::pow(r.array().pow(q).sum(), 1.0 / q);
  if (grad) {
    grad->resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double sg = y(i) > 0 ? 1.0 : (y(i) < 0 ? -1.0 : 0.0);
      (*grad)(i) = s(i) * sg * std::pow(std::abs(y(i)) / v, q - 1.0);
    }
  }
  return v;
}

}  // namespace

SectionBody::SectionBody(ConvexBody K, Subspace E, Mat fiber, Mat normal, Mode mode)
    : parent_(std::move(K)), carrier_(std::move(E)), fiber_(std::move(fiber)), normal_(std::move(normal)), mode_(mode) {
  if (carrier_.ambient() != parent_.dim()) throw DimensionMismatch("section: subspace and body dimensions differ");
  if (carrier_.dim() < 1) throw DimensionMismatch("section: carrier must have dimension >= 1");
  if (normal_.cols() > 0) polar_parent_ = parent_.polar();
}

SectionBody SectionBody::section(const ConvexBody& K, const Subspace& F) {
  return SectionBody(K, F, Mat(F.ambient(), 0), F.complement().basis(), Mode::section);
}

SectionBody SectionBody::projection(const ConvexBody& K, const Subspace& F) {
  return SectionBody(K, F, F.complement().basis(), Mat(F.ambient(), 0), Mode::projection);
}

SectionBody SectionBody::general(const ConvexBody& K, const Subspace& E, const Subspace& G) {
  if (G.containment_residual(E) > 1e-8) throw HypothesisViolated("section: carrier must lie in the cut subspace");
  const Subspace fiber = intersection(G, E.complement());
  const Mat normal = G.complement().basis();
  const Mode mode = fiber.dim() == 0 ? Mode::section : (normal.cols() == 0 ? Mode::projection : Mode::general);
  return SectionBody(K, E, fiber.basis(), normal, mode);
}

SectionBody SectionBody::projection_then_section(const ConvexBody& K, const Subspace& F, const Subspace& E) {
  if (F.containment_residual(E) > 1e-8) throw HypothesisViolated("quotient of subspace: E must lie in F");
  return general(K, E, sum(F.complement(), E));
}

double SectionBody::gauge(const Vec& u) const {
  if (u.size() != dim()) throw DimensionMismatch("section gauge: wrong carrier dimension");
  if (!u.allFinite()) throw NonFiniteInput("section gauge: non-finite input");
  return gauge_with(u, nullptr);
}

double SectionBody::gauge_with(const Vec& u, Vec* grad, Vec* lifted) const {
  const Mat& B = carrier_.basis();
  const Vec x0 = B * u;
  if (fiber_.cols() == 0) {
    Vec g;
    const double v = parent_.impl().gauge(x0, grad ? &g : nullptr);
    if (grad) *grad = B.transpose() * g;
    if (lifted) *lifted = x0;
    return v;
  }
  const AffineMin m = parent_.impl().min_gauge_affine(x0, fiber_);
  if (grad) *grad = B.transpose() * m.grad_x0;
  if (lifted) *lifted = m.z.size() == fiber_.cols() ? Vec(x0 + fiber_ * m.z) : x0;
  return m.value;
}

double SectionBody::support(const Vec& y) const {
  if (y.size() != dim()) throw DimensionMismatch("section support: wrong carrier dimension");
  const Vec x = carrier_.basis() * y;
  if (normal_.cols() == 0) return parent_.impl().support(x, nullptr);
  return polar_parent_->impl().min_gauge_affine(x, normal_).value;
}

std::optional<Mat> SectionBody::quadratic_form() const {
  auto A = parent_.quadratic_form();
  if (!A) return std::nullopt;
  const Mat& BE = carrier_.basis();
  if (fiber_.cols() == 0) return Mat(BE.transpose() * (*A) * BE);
  const Eigen::Index e = BE.cols();
  Mat BG(BE.rows(), e + fiber_.cols());
  BG << BE, fiber_;
  const Mat M = BG.transpose() * (*A) * BG;
  // ellipsoid {s : s^T M s <= 1} projected to the first e coordinates
  const Mat minv_ee = M.ldlt().solve(Mat::Identity(M.rows(), e)).topRows(e);
  Mat Q = minv_ee.ldlt().solve(Mat::Identity(e, e));
  return Mat(0.5 * (Q + Q.transpose()));
}

ConvexBody SectionBody::as_body() const { return ConvexBody(std::make_shared<SectionImpl>(*this)); }

RadiusEstimate out_radius(const SectionBody& S, const RadiusOptions& opts, const std::vector<Vec>& warm) {
  RadiusEstimate out;
  const int m = S.dim();
  if (m == 1) {
    out.point = Vec::Ones(1);
    out.value = 1.0 / S.gauge_with(out.point, nullptr);
    out.exact = S.parent().exact();
    return out;
  }
  if (m == S.parent().dim() && S.parent().radii().R_exact) {
    out.value = S.parent().radii().R;
    out.exact = true;
    return out;
  }
  if (auto q = S.quadratic_form()) {
    Eigen::SelfAdjointEigenSolver<Mat> es(*q);
    out.value = 1.0 / std::sqrt(es.eigenvalues()(0));
    out.point = es.eigenvectors().col(0);
    out.exact = true;
    return out;
  }
  Rng rng = make_stream(opts.seed, 11);
  const auto lpf = S.parent().lp_form();
  const Mat& BE = S.carrier().basis();
  const bool cheap_proxy = lpf.has_value();
  auto proxy = [&](const Vec& u) {
    if (cheap_proxy) return lq_value(lpf->scales, BE * u, lpf->p, nullptr);
    return S.gauge_with(u, nullptr);
  };
  std::vector<Vec> starts = candidate_starts(S, rng, opts, false, proxy);
  for (const Vec& w : warm) {
    if (w.size() == m && w.norm() > 1e-12) starts.push_back(w.normalized());
  }

  auto exact_f = [&](const Vec& u, Vec* g) { return S.gauge_with(u, g); };
  std::function<SphereExtremum(Vec)> refine;
  if (lpf && lpf->p < 2.0) {
    refine = [&](Vec u) { return mm_descent(S, *lpf, std::move(u), opts.steps); };
  } else if (lpf && S.fiber().cols() == 0) {
    refine = [&](Vec u) {
      const std::vector<double> qs = std::isinf(lpf->p) ? std::vector<double>{8.0, 32.0, 128.0} : std::vector<double>{};
      for (double q : qs) {
        auto fq = [&](const Vec& v, Vec* g) {
          Vec gx;
          const double val = lq_value(lpf->scales, BE * v, q, g ? &gx : nullptr);
          if (g) *g = BE.transpose() * gx;
          return val;
        };
        u = projected_descent(fq, u, opts.steps, 1e-12).point;
      }
      return projected_descent(exact_f, u, opts.steps, 1e-12);
    };
  } else {
    refine = [&](Vec u) { return projected_descent(exact_f, std::move(u), opts.steps, 1e-12); };
  }
  SphereExtremum best;
  best.value = kInf;
  for (const Vec& s : starts) {
    SphereExtremum e = refine(s);
    if (e.value < best.value) best = std::move(e);
  }
  // the refiners may score points by an upper bound on the gauge; rescore exactly
  const double exact_val = S.gauge_with(best.point, nullptr);
  out.value = 1.0 / std::min(best.value, exact_val);
  out.point = best.point;
  out.exact = false;
  return out;
}

RadiusEstimate in_radius(const SectionBody& S, const RadiusOptions& opts) {
  RadiusEstimate out;
  const int m = S.dim();
  if (m == 1) {
    out.point = Vec::Ones(1);
    out.value = 1.0 / S.gauge_with(out.point, nullptr);
    out.exact = S.parent().exact();
    return out;
  }
  if (auto q = S.quadratic_form()) {
    Eigen::SelfAdjointEigenSolver<Mat> es(*q);
    out.value = 1.0 / std::sqrt(es.eigenvalues()(m - 1));
    out.point = es.eigenvectors().col(m - 1);
    out.exact = true;
    return out;
  }
  Rng rng = make_stream(opts.seed, 12);
  auto f = [&](const Vec& u, Vec* g) { return S.gauge_with(u, g); };
  SphereSearch search;
  search.probes = opts.probes;
  search.starts = opts.starts;
  search.steps = opts.steps;
  const SphereExtremum e = maximize_on_sphere(f, m, rng, search);
  out.value = 1.0 / e.value;
  out.point = e.point;
  return out;
}

Distance geometric_distance_to_ball(const SectionBody& S, const RadiusOptions& opts) {
  Distance d;
  d.R = out_radius(S, opts);
  d.r = in_radius(S, opts);
  d.value = std::max(1.0, d.R.value / d.r.value);
  return d;
}

double perp_identity_check(const ConvexBody& A, const Subspace& E1, const Subspace& E2, Rng& rng, int directions) {
  if (E1.ambient() != A.dim() || E2.ambient() != A.dim()) throw DimensionMismatch("perp identity: dimensions differ");
  if (E1.containment_residual(E2.complement()) > 1e-8) {
    throw HypothesisViolated("perp identity: E1 must contain the orthogonal complement of E2");
  }
  const Subspace I = intersection(E1, E2);
  if (I.dim() == 0) return 0.0;
  const SectionBody lhs = SectionBody::general(A, I, E1);
  const SectionBody rhs = SectionBody::projection(A, E2);
  const Mat D = E2.basis().transpose() * I.basis();
  const auto ql = lhs.quadratic_form();
  const auto qr = rhs.quadratic_form();
  double worst = 0.0;
  for (int t = 0; t < directions; ++t) {
    const Vec u = random_direction(rng, I.dim());
    const Vec v = D * u;
    double a;
    double b;
    if (ql && qr) {
      a = std::sqrt(std::max(0.0, u.dot(*ql * u)));
      b = std::sqrt(std::max(0.0, v.dot(*qr * v)));
    } else {
      a = lhs.gauge_with(u, nullptr);
      b = rhs.gauge_with(v, nullptr);
    }
    worst = std::max(worst, std::abs(a - b));
  }
  return worst;
}

}  // namespace regpos
