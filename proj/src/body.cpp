#include "regpos/body.hpp"

#include "regpos/lp.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace regpos {

using json = nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

double conjugate(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

// ||v||_q for q in [1, inf].
double qnorm(const Vec& v, double q) {
  const Vec a = v.cwiseAbs();
  const double m = a.maxCoeff();
  if (std::isinf(q) || m == 0.0) return m;
  if (q == 1.0) return a.sum();
  return m * std::pow((a / m).array().pow(q).sum(), 1.0 / q);
}

// ||w ∘ x||_p with a subgradient in x.
double lp_eval(double p, const Vec& w, const Vec& x, Vec* grad) {
  const Vec y = w.cwiseProduct(x);
  if (p == 1.0) {
    if (grad) *grad = w.cwiseProduct(y.unaryExpr([](double v) { return sgn(v); }));
    return y.cwiseAbs().sum();
  }
  if (std::isinf(p)) {
    Eigen::Index arg = 0;
    const double v = y.cwiseAbs().maxCoeff(&arg);
    if (grad) {
      *grad = Vec::Zero(x.size());
      (*grad)(arg) = w(arg) * sgn(y(arg));
    }
    return v;
  }
  if (p == 2.0) {
    const double v = y.norm();
    if (grad) *grad = v > 0 ? Vec(w.cwiseProduct(y) / v) : Vec(Vec::Zero(x.size()));
    return v;
  }
  const double m = y.cwiseAbs().maxCoeff();
  if (m == 0.0) {
    if (grad) *grad = Vec::Zero(x.size());
    return 0.0;
  }
  const double v = m * std::pow((y.cwiseAbs() / m).array().pow(p).sum(), 1.0 / p);
  if (grad) {
    grad->resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      (*grad)(i) = w(i) * sgn(y(i)) * std::pow(std::abs(y(i)) / v, p - 1.0);
    }
  }
  return v;
}

Radii lp_radii(double p, const Vec& w) {
  Radii out;
  out.r_exact = out.R_exact = true;
  if (p <= 2.0) {
    const double q = p == 2.0 ? kInf : 2.0 * p / (2.0 - p);
    out.r = 1.0 / qnorm(w, q);
    out.R = 1.0 / w.minCoeff();
  } else {
    const double ps = conjugate(p);
    const double q = ps == 2.0 ? kInf : 2.0 * ps / (2.0 - ps);
    out.r = 1.0 / w.maxCoeff();
    out.R = qnorm(w.cwiseInverse(), q);
  }
  return out;
}

Radii quadratic_radii(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
  Radii out;
  out.r = 1.0 / std::sqrt(es.eigenvalues().maxCoeff());
  out.R = 1.0 / std::sqrt(es.eigenvalues().minCoeff());
  out.r_exact = out.R_exact = true;
  return out;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

json p_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

bool is_diagonal(const Mat& m) {
  return (m - Mat(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
}

void check_full_rank(const Mat& rows, const char* what) {
  if (rows.cols() == 0 || rows.rows() == 0) throw DegenerateBody(std::string(what) + ": empty");
  if (!rows.allFinite()) throw NonFiniteInput(std::string(what) + ": non-finite entries");
  Eigen::JacobiSVD<Mat> svd(rows);
  const Vec s = svd.singularValues();
  if (s.size() < rows.cols() || !(s(s.size() - 1) > 1e-12 * s(0))) {
    throw DegenerateBody(std::string(what) + ": body has empty interior or is unbounded");
  }
}

// ---------------------------------------------------------------------------

class LpImpl final : public BodyImpl {
 public:
  LpImpl(double p, Vec w) : p_(p), w_(std::move(w)) {
    if (!(p_ >= 1.0)) throw DegenerateBody("weighted lp needs p >= 1");
    if (w_.size() == 0) throw DimensionMismatch("weighted lp needs at least one weight");
    if (!w_.allFinite()) throw NonFiniteInput("weighted lp: non-finite weights");
    if (!(w_.minCoeff() > 0.0)) throw DegenerateBody("weighted lp: weights must be positive");
    ps_ = conjugate(p_);
  }

  int dim() const override { return static_cast<int>(w_.size()); }
  Family family() const override { return Family::weighted_lp; }
  Symmetry symmetry() const override {
    Symmetry s;
    s.sign_flips = true;
    s.permutations = (w_.array() == w_(0)).all();
    return s;
  }

  double gauge(const Vec& x, Vec* g) const override { return lp_eval(p_, w_, x, g); }
  double support(const Vec& y, Vec* pt) const override { return lp_eval(ps_, w_.cwiseInverse(), y, pt); }

  AffineMin min_gauge_affine(const Vec& x0, const Mat& W) const override {
    AffineMin out;
    if (W.cols() == 0) {
      out.z = Vec(0);
      out.value = gauge(x0, &out.grad_x0);
      return out;
    }
    if (p_ == 1.0 || std::isinf(p_)) {
      const Mat C = w_.asDiagonal();
      const lp::AffineValue v = p_ == 1.0 ? lp::min_sum_abs(C, x0, W) : lp::min_max_abs(C, x0, W);
      if (!v.ok) return BodyImpl::min_gauge_affine(x0, W);
      out.value = v.value;
      out.z = v.z;
      out.grad_x0 = v.grad_x0;
      return out;
    }
    const Mat A = w_.asDiagonal() * W;
    const Vec y0 = w_.cwiseProduct(x0);
    Vec z = A.colPivHouseholderQr().solve(-y0);
    if (p_ != 2.0) z = newton(y0, A, std::move(z), out);
    out.z = z;
    out.value = gauge(x0 + W * z, &out.grad_x0);
    return out;
  }

  std::optional<LpForm> lp_form() const override { return LpForm{p_, w_}; }
  std::optional<Mat> quadratic_form() const override {
    if (p_ != 2.0) return std::nullopt;
    return Mat(w_.array().square().matrix().asDiagonal());
  }
  std::optional<ConvexBody> closed_polar() const override {
    return ConvexBody::lp_from_scales(ps_, w_.cwiseInverse());
  }
  std::optional<Radii> exact_radii() const override { return lp_radii(p_, w_); }

  std::string spec_json() const override {
    return json{{"family", "weighted_lp"}, {"p", p_json(p_)}, {"scales", vec_json(w_)}}.dump();
  }

 private:
  // Damped Newton on sum |y0 + A z|^p.
  Vec newton(const Vec& y0, const Mat& A, Vec z, AffineMin& out) const {
    const int d = static_cast<int>(A.cols());
    auto phi = [&](const Vec& zz) {
      const Vec y = y0 + A * zz;
      const double m = y.cwiseAbs().maxCoeff();
      if (m == 0.0) return 0.0;
      return std::pow(m, p_) * (y.cwiseAbs() / m).array().pow(p_).sum();
    };
    double f = phi(z);
    for (int it = 0; it < 100; ++it) {
      const Vec y = y0 + A * z;
      const double m = y.cwiseAbs().maxCoeff();
      if (m == 0.0) break;
      const Vec ay = y.cwiseAbs().cwiseMax(1e-12 * m);
      Vec g = A.transpose() * (p_ * y.cwiseProduct(ay.array().pow(p_ - 2.0).matrix()));
      Mat H = A.transpose() * (p_ * (p_ - 1.0) * ay.array().pow(p_ - 2.0)).matrix().asDiagonal() * A;
      H.diagonal().array() += 1e-14 * H.diagonal().cwiseAbs().maxCoeff() + 1e-300;
      const Vec step = H.ldlt().solve(-g);
      const double decrement = -g.dot(step);
      if (!(decrement > 1e-28 * std::max(f, 1e-300))) break;
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vec zc = z + t * step;
        const double fc = phi(zc);
        if (fc <= f - 0.25 * t * decrement) {
          z = zc;
          f = fc;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
      if (decrement < 1e-24 * std::max(f, 1e-300)) break;
      out.residual = std::sqrt(std::max(decrement, 0.0));
      (void)d;
    }
    return z;
  }

  double p_;
  double ps_;
  Vec w_;
};

class EllipsoidImpl final : public BodyImpl {
 public:
  explicit EllipsoidImpl(const Mat& A) {
    if (A.rows() != A.cols() || A.rows() == 0) throw DimensionMismatch("ellipsoid matrix must be square");
    if (!A.allFinite()) throw NonFiniteInput("ellipsoid matrix has non-finite entries");
    const double scale = A.cwiseAbs().maxCoeff();
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300)) {
      throw DegenerateBody("ellipsoid matrix must be symmetric");
    }
    a_ = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(a_, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 1e-14 * es.eigenvalues().cwiseAbs().maxCoeff())) {
      throw DegenerateBody("ellipsoid matrix must be positive definite");
    }
    Eigen::LLT<Mat> llt(a_);
    ainv_ = llt.solve(Mat::Identity(a_.rows(), a_.cols()));
    ainv_ = 0.5 * (ainv_ + ainv_.transpose()).eval();
    diagonal_ = is_diagonal(a_);
  }

  int dim() const override { return static_cast<int>(a_.rows()); }
  Family family() const override { return Family::ellipsoid; }
  Symmetry symmetry() const override {
    Symmetry s;
    s.sign_flips = diagonal_;
    s.permutations = diagonal_ && (a_.diagonal().array() == a_(0, 0)).all();
    return s;
  }

  double gauge(const Vec& x, Vec* g) const override { return quad(a_, x, g); }
  double support(const Vec& y, Vec* pt) const override { return quad(ainv_, y, pt); }

  AffineMin min_gauge_affine(const Vec& x0, const Mat& W) const override {
    AffineMin out;
    if (W.cols() == 0) {
      out.z = Vec(0);
      out.value = gauge(x0, &out.grad_x0);
      return out;
    }
    const Mat M = W.transpose() * a_ * W;
    out.z = M.ldlt().solve(-(W.transpose() * (a_ * x0)));
    out.value = gauge(x0 + W * out.z, &out.grad_x0);
    return out;
  }

  std::optional<LpForm> lp_form() const override {
    if (!diagonal_) return std::nullopt;
    return LpForm{2.0, a_.diagonal().cwiseSqrt()};
  }
  std::optional<Mat> quadratic_form() const override { return a_; }
  std::optional<ConvexBody> closed_polar() const override { return ConvexBody::ellipsoid(ainv_); }
  std::optional<Radii> exact_radii() const override { return quadratic_radii(a_); }

  std::string spec_json() const override { return json{{"family", "ellipsoid"}, {"matrix", mat_json(a_)}}.dump(); }

 private:
  static double quad(const Mat& q, const Vec& x, Vec* g) {
    const Vec qx = q * x;
    const double v = std::sqrt(std::max(0.0, x.dot(qx)));
    if (g) *g = v > 0 ? Vec(qx / v) : Vec(Vec::Zero(x.size()));
    return v;
  }

  Mat a_;
  Mat ainv_;
  bool diagonal_ = false;
};

class PolytopeHImpl final : public BodyImpl {
 public:
  explicit PolytopeHImpl(const Mat& rows) : a_(rows) { check_full_rank(a_, "polytope_h"); }

  int dim() const override { return static_cast<int>(a_.cols()); }
  Family family() const override { return Family::polytope_h; }

  double gauge(const Vec& x, Vec* g) const override {
    const Vec r = a_ * x;
    Eigen::Index arg = 0;
    const double v = r.cwiseAbs().maxCoeff(&arg);
    if (g) *g = v > 0 ? Vec(sgn(r(arg)) * a_.row(arg).transpose()) : Vec(Vec::Zero(x.size()));
    return v;
  }

  double support(const Vec& y, Vec* pt) const override {
    if (y.isZero(0.0)) {
      if (pt) *pt = Vec::Zero(y.size());
      return 0.0;
    }
    const lp::AffineValue v = lp::max_over_slab_polytope(a_, y);
    if (!v.ok) return BodyImpl::support(y, pt);
    if (pt) *pt = v.z;
    return v.value;
  }

  AffineMin min_gauge_affine(const Vec& x0, const Mat& W) const override {
    const lp::AffineValue v = lp::min_max_abs(a_, x0, W);
    if (!v.ok) return BodyImpl::min_gauge_affine(x0, W);
    AffineMin out;
    out.value = v.value;
    out.z = v.z;
    out.grad_x0 = v.grad_x0;
    return out;
  }

  std::optional<ConvexBody> closed_polar() const override { return ConvexBody::polytope_v(a_); }
  std::optional<Radii> exact_radii() const override {
    Radii out;
    out.r = 1.0 / a_.rowwise().norm().maxCoeff();
    out.r_exact = true;
    return out;
  }
  std::string spec_json() const override { return json{{"family", "polytope_h"}, {"rows", mat_json(a_)}}.dump(); }

 private:
  Mat a_;
};

class PolytopeVImpl final : public BodyImpl {
 public:
  explicit PolytopeVImpl(const Mat& vertices) : v_(vertices) { check_full_rank(v_, "polytope_v"); }

  int dim() const override { return static_cast<int>(v_.cols()); }
  Family family() const override { return Family::polytope_v; }

  double gauge(const Vec& x, Vec* g) const override {
    if (x.isZero(0.0)) {
      if (g) *g = Vec::Zero(x.size());
      return 0.0;
    }
    const lp::AffineValue v = lp::max_over_slab_polytope(v_, x);
    if (!v.ok) throw DegenerateBody("polytope_v: gauge program failed");
    if (g) *g = v.z;
    return v.value;
  }

  double support(const Vec& y, Vec* pt) const override {
    const Vec r = v_ * y;
    Eigen::Index arg = 0;
    const double v = r.cwiseAbs().maxCoeff(&arg);
    if (pt) *pt = v > 0 ? Vec(sgn(r(arg)) * v_.row(arg).transpose()) : Vec(Vec::Zero(y.size()));
    return v;
  }

  // min_z gauge(x0 + W z) = max { <x0, u> : |<v_i, u>| <= 1, W^T u = 0 }.
  AffineMin min_gauge_affine(const Vec& x0, const Mat& W) const override {
    if (W.cols() == 0) {
      AffineMin out;
      out.z = Vec(0);
      out.value = gauge(x0, &out.grad_x0);
      return out;
    }
    const Mat N = orthogonal_complement(W);
    const lp::AffineValue v = lp::max_over_slab_polytope(v_ * N, N.transpose() * x0);
    if (!v.ok) return BodyImpl::min_gauge_affine(x0, W);
    AffineMin out;
    out.value = v.value;
    out.grad_x0 = N * v.z;
    out.z = Vec::Zero(W.cols());
    return out;
  }

  std::optional<ConvexBody> closed_polar() const override { return ConvexBody::polytope_h(v_); }
  std::optional<Radii> exact_radii() const override {
    Radii out;
    out.R = v_.rowwise().norm().maxCoeff();
    out.R_exact = true;
    return out;
  }
  std::string spec_json() const override {
    return json{{"family", "polytope_v"}, {"vertices", mat_json(v_)}}.dump();
  }

 private:
  Mat v_;
};

class LinearImageImpl final : public BodyImpl {
 public:
  LinearImageImpl(PositionMap t, ConvexBody base) : t_(std::move(t)), base_(std::move(base)) {
    if (t_.dim() != base_.dim()) throw DimensionMismatch("linear image: map and body dimensions differ");
  }

  int dim() const override { return base_.dim(); }
  Family family() const override { return Family::linear_image; }
  bool exact() const override { return base_.exact(); }
  Symmetry symmetry() const override {
    Symmetry s;
    if (!t_.is_diagonal()) return s;
    const Symmetry b = base_.symmetry();
    const Vec d = t_.diagonal_entries();
    s.sign_flips = b.sign_flips;
    s.permutations = b.permutations && (d.array() == d(0)).all();
    return s;
  }

  double gauge(const Vec& x, Vec* g) const override {
    Vec gb;
    const double v = base_.impl().gauge(t_.apply_inverse(x), g ? &gb : nullptr);
    if (g) *g = t_.is_diagonal() ? Vec(t_.inverse().diagonal().cwiseProduct(gb)) : Vec(t_.adjoint_inverse() * gb);
    return v;
  }

  double support(const Vec& y, Vec* pt) const override {
    Vec pb;
    const Vec ty = t_.is_diagonal() ? Vec(t_.matrix().diagonal().cwiseProduct(y)) : Vec(t_.matrix().transpose() * y);
    const double v = base_.impl().support(ty, pt ? &pb : nullptr);
    if (pt) *pt = t_.apply(pb);
    return v;
  }

  AffineMin min_gauge_affine(const Vec& x0, const Mat& W) const override {
    AffineMin out = base_.impl().min_gauge_affine(t_.apply_inverse(x0), t_.inverse() * W);
    out.grad_x0 = t_.adjoint_inverse() * out.grad_x0;
    return out;
  }

  std::optional<LpForm> lp_form() const override {
    if (!t_.is_diagonal()) return std::nullopt;
    auto f = base_.lp_form();
    if (!f) return std::nullopt;
    f->scales = f->scales.cwiseProduct(t_.inverse().diagonal());
    return f;
  }
  std::optional<Mat> quadratic_form() const override {
    auto q = base_.quadratic_form();
    if (!q) return std::nullopt;
    return Mat(t_.adjoint_inverse() * (*q) * t_.inverse());
  }
  std::optional<ConvexBody> closed_polar() const override {
    return linear_image(t_.adjoint_inverse_map(), base_.polar());
  }
  std::optional<Radii> exact_radii() const override {
    if (auto f = lp_form()) return lp_radii(f->p, f->scales);
    if (auto q = quadratic_form()) return quadratic_radii(*q);
    return std::nullopt;
  }
  std::string spec_json() const override {
    json j{{"family", "linear_image"}, {"matrix", mat_json(t_.matrix())}, {"base", json::parse(base_.spec_json())}};
    return j.dump();
  }

  const PositionMap& map() const { return t_; }
  const ConvexBody& base() const { return base_; }

 private:
  PositionMap t_;
  ConvexBody base_;
};

class PolarImpl final : public BodyImpl {
 public:
  explicit PolarImpl(ConvexBody base) : base_(std::move(base)) {}

  int dim() const override { return base_.dim(); }
  Family family() const override { return Family::polar; }
  bool exact() const override { return base_.exact(); }
  Symmetry symmetry() const override { return base_.symmetry(); }

  double gauge(const Vec& x, Vec* g) const override { return base_.impl().support(x, g); }
  double support(const Vec& y, Vec* pt) const override { return base_.impl().gauge(y, pt); }

  std::optional<ConvexBody> closed_polar() const override { return base_; }
  std::optional<Radii> exact_radii() const override {
    const Radii& b = base_.radii();
    Radii out;
    out.r = 1.0 / b.R;
    out.R = 1.0 / b.r;
    out.r_exact = b.R_exact;
    out.R_exact = b.r_exact;
    return out;
  }
  std::string spec_json() const override {
    return json{{"family", "polar"}, {"base", json::parse(base_.spec_json())}}.dump();
  }

 private:
  ConvexBody base_;
};

class ComplexifiedImpl final : public BodyImpl {
 public:
  static constexpr int kGrid = 256;

  explicit ComplexifiedImpl(ConvexBody base) : base_(std::move(base)), n_(base_.dim()) {}

  int dim() const override { return 2 * n_; }
  Family family() const override { return Family::complexified; }
  bool exact() const override { return false; }
  Symmetry symmetry() const override {
    Symmetry s;
    s.circled = true;
    return s;
  }

  double gauge(const Vec& v, Vec* g) const override {
    const Vec x = v.head(n_);
    const Vec y = v.tail(n_);
    const BodyImpl& b = base_.impl();
    if (y.isZero(0.0) || x.isZero(0.0)) {
      const bool real = y.isZero(0.0);
      Vec gb;
      const double val = b.gauge(real ? x : y, g ? &gb : nullptr);
      if (g) {
        *g = Vec::Zero(2 * n_);
        (real ? g->head(n_) : g->tail(n_)) = gb;
      }
      return val;
    }
    auto f = [&](double th) { return b.gauge(std::cos(th) * x + std::sin(th) * y, nullptr); };
    const double h = std::numbers::pi / kGrid;
    int best = 0;
    double fbest = -1.0;
    for (int i = 0; i < kGrid; ++i) {
      const double fi = f(i * h);
      if (fi > fbest) {
        fbest = fi;
        best = i;
      }
    }
    // golden section on the bracketing cell pair
    double lo = (best - 1) * h;
    double hi = (best + 1) * h;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    while (hi - lo > 1e-10) {
      if (fc >= fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - inv_phi * (hi - lo);
        fc = f(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + inv_phi * (hi - lo);
        fd = f(d);
      }
    }
    double th = best * h;
    if (fc > fbest) {
      fbest = fc;
      th = c;
    }
    if (fd > fbest) {
      fbest = fd;
      th = d;
    }
    if (g) {
      Vec gb;
      b.gauge(std::cos(th) * x + std::sin(th) * y, &gb);
      g->resize(2 * n_);
      g->head(n_) = std::cos(th) * gb;
      g->tail(n_) = std::sin(th) * gb;
    }
    return fbest;
  }

  std::optional<Radii> exact_radii() const override {
    const Radii& b = base_.radii();
    Radii out;
    out.r = b.r;
    out.r_exact = b.r_exact;
    return out;
  }

  std::string spec_json() const override {
    return json{{"family", "complexify"}, {"base", json::parse(base_.spec_json())}}.dump();
  }

 private:
  ConvexBody base_;
  int n_;
};

void check_vec(const Vec& x, int n) {
  if (x.size() != n) throw DimensionMismatch("vector has dimension " + std::to_string(x.size()) + ", body has " + std::to_string(n));
  if (!x.allFinite()) throw NonFiniteInput("non-finite input vector");
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::ellipsoid: return "ellipsoid";
    case Family::weighted_lp: return "weighted_lp";
    case Family::polytope_h: return "polytope_h";
    case Family::polytope_v: return "polytope_v";
    case Family::linear_image: return "linear_image";
    case Family::polar: return "polar";
    case Family::complexified: return "complexify";
    case Family::surrogate: return "surrogate";
    case Family::section: return "section";
  }
  return "unknown";
}

Mat orthogonal_complement(const Mat& basis) {
  const Eigen::Index n = basis.rows();
  const Eigen::Index m = basis.cols();
  if (m == 0) return Mat::Identity(n, n);
  Eigen::HouseholderQR<Mat> qr(basis);
  const Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - m);
}

ConvexMin bfgs_minimize(const std::function<double(const Vec&, Vec*)>& f, Vec z0, int max_iter, double tol) {
  ConvexMin out;
  const Eigen::Index d = z0.size();
  Vec z = std::move(z0);
  Vec g;
  double fz = f(z, &g);
  Mat H = Mat::Identity(d, d);
  int stalls = 0;
  int it = 0;
  for (; it < max_iter; ++it) {
    if (!(g.norm() > 1e-15 * std::max(1.0, std::abs(fz)))) {
      out.converged = true;
      break;
    }
    Vec dir = -H * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      H.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double t = 1.0;
    double lo = 0.0;
    double hi = kInf;
    Vec zt;
    Vec gt;
    double ft = fz;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      zt = z + t * dir;
      ft = f(zt, &gt);
      if (ft > fz + 1e-4 * t * slope) {
        hi = t;
      } else if (gt.dot(dir) < 0.9 * slope) {
        lo = t;
      } else {
        ok = true;
        break;
      }
      t = std::isinf(hi) ? 2.0 * t : 0.5 * (lo + hi);
    }
    if (!ok) {
      if (lo > 0.0) {
        zt = z + lo * dir;
        ft = f(zt, &gt);
        t = lo;
      } else {
        out.converged = true;  // no descent available at working precision
        break;
      }
    }
    const Vec s = zt - z;
    const Vec yv = gt - g;
    const double decrease = fz - ft;
    z = std::move(zt);
    g = std::move(gt);
    fz = ft;
    const double sy = s.dot(yv);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Mat I = Mat::Identity(d, d);
      H = (I - rho * s * yv.transpose()) * H * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
    }
    if (decrease <= tol * std::max(1.0, std::abs(fz))) {
      if (++stalls >= 3) {
        out.converged = true;
        break;
      }
    } else {
      stalls = 0;
    }
  }
  out.value = fz;
  out.z = std::move(z);
  out.grad = std::move(g);
  out.iterations = it;
  return out;
}

double BodyImpl::support(const Vec& y, Vec* point) const {
  const double ny2 = y.squaredNorm();
  if (ny2 == 0.0) {
    if (point) *point = Vec::Zero(y.size());
    return 0.0;
  }
  // h(y) = 1 / min { gauge(x) : <x, y> = 1 }
  const Vec x0 = y / ny2;
  const Mat W = orthogonal_complement(y);
  const AffineMin m = min_gauge_affine(x0, W);
  if (!(m.value > 0.0)) throw DegenerateBody("support: body is unbounded in this direction");
  if (point) *point = (x0 + W * m.z) / m.value;
  return 1.0 / m.value;
}

AffineMin BodyImpl::min_gauge_affine(const Vec& x0, const Mat& W) const {
  AffineMin out;
  if (W.cols() == 0) {
    out.z = Vec(0);
    out.value = gauge(x0, &out.grad_x0);
    return out;
  }
  Vec start = W.colPivHouseholderQr().solve(-x0);
  auto fz = [&](const Vec& z, Vec* g) {
    Vec gx;
    const double v = gauge(x0 + W * z, g ? &gx : nullptr);
    if (g) *g = W.transpose() * gx;
    return v;
  };
  const ConvexMin r = bfgs_minimize(fz, std::move(start));
  out.z = r.z;
  out.value = gauge(x0 + W * r.z, &out.grad_x0);
  out.converged = r.converged;
  out.residual = r.grad.norm();
  return out;
}

std::optional<ConvexBody> BodyImpl::closed_polar() const { return std::nullopt; }

const Radii& BodyImpl::radii() const {
  std::call_once(radii_once_, [this] {
    Radii out;
    if (auto e = exact_radii()) out = *e;
    const int n = dim();
    SphereSearch opts;
    if (!out.R_exact) {
      Rng rng = make_stream(0x5eed, 1);
      auto h = [this](const Vec& u, Vec* g) { return support(u, g); };
      out.R = maximize_on_sphere(h, n, rng, opts).value;
    }
    if (!out.r_exact) {
      Rng rng = make_stream(0x5eed, 2);
      auto gfun = [this](const Vec& u, Vec* g) { return gauge(u, g); };
      out.r = 1.0 / maximize_on_sphere(gfun, n, rng, opts).value;
    }
    radii_ = out;
  });
  return radii_;
}

// ---------------------------------------------------------------------------

ConvexBody::ConvexBody(BodyPtr impl) : impl_(std::move(impl)) {
  if (!impl_) throw Error("null body");
}

ConvexBody ConvexBody::ellipsoid(const Mat& A) { return ConvexBody(std::make_shared<EllipsoidImpl>(A)); }

ConvexBody ConvexBody::weighted_lp(double p, const Vec& v) {
  if (!(p >= 1.0)) throw DegenerateBody("weighted lp needs p >= 1");
  if (!v.allFinite()) throw NonFiniteInput("weighted lp: non-finite weights");
  if (std::isinf(p)) return lp_from_scales(p, v);
  return lp_from_scales(p, v.array().pow(1.0 / p).matrix());
}

ConvexBody ConvexBody::lp_from_scales(double p, const Vec& w) { return ConvexBody(std::make_shared<LpImpl>(p, w)); }

ConvexBody ConvexBody::unit_ball(double p, int n) { return lp_from_scales(p, Vec::Ones(n)); }

ConvexBody ConvexBody::polytope_h(const Mat& rows) { return ConvexBody(std::make_shared<PolytopeHImpl>(rows)); }

ConvexBody ConvexBody::polytope_v(const Mat& vertices) {
  return ConvexBody(std::make_shared<PolytopeVImpl>(vertices));
}

double ConvexBody::gauge(const Vec& x) const {
  check_vec(x, dim());
  return impl_->gauge(x, nullptr);
}

Vec ConvexBody::gauge_subgradient(const Vec& x) const {
  check_vec(x, dim());
  Vec g;
  impl_->gauge(x, &g);
  return g;
}

double ConvexBody::support(const Vec& y) const {
  check_vec(y, dim());
  return impl_->support(y, nullptr);
}

Vec ConvexBody::support_point(const Vec& y) const {
  check_vec(y, dim());
  Vec p;
  impl_->support(y, &p);
  return p;
}

AffineMin ConvexBody::min_gauge_affine(const Vec& x0, const Mat& W) const {
  check_vec(x0, dim());
  if (W.rows() != dim()) throw DimensionMismatch("affine direction matrix has wrong row count");
  if (!W.allFinite()) throw NonFiniteInput("non-finite affine directions");
  return impl_->min_gauge_affine(x0, W);
}

ConvexBody ConvexBody::polar() const {
  if (auto p = impl_->closed_polar()) return *p;
  return ConvexBody(std::make_shared<PolarImpl>(*this));
}

ConvexBody polar(const ConvexBody& K) { return K.polar(); }

ConvexBody linear_image(const PositionMap& T, const ConvexBody& K) {
  if (T.dim() != K.dim()) throw DimensionMismatch("linear image: map and body dimensions differ");
  if (K.family() == Family::weighted_lp && T.is_diagonal()) {
    const LpForm f = *K.lp_form();
    return ConvexBody::lp_from_scales(f.p, f.scales.cwiseProduct(T.inverse().diagonal()));
  }
  if (K.family() == Family::ellipsoid) {
    return ConvexBody::ellipsoid(T.adjoint_inverse() * (*K.quadratic_form()) * T.inverse());
  }
  if (const auto* li = dynamic_cast<const LinearImageImpl*>(&K.impl())) {
    return linear_image(T.compose(li->map()), li->base());
  }
  return ConvexBody(std::make_shared<LinearImageImpl>(T, K));
}

ConvexBody scaled(double a, const ConvexBody& K) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DegenerateBody("scaling factor must be positive");
  return linear_image(PositionMap::scaling(K.dim(), a), K);
}

ConvexBody complexify(const ConvexBody& K) { return ConvexBody(std::make_shared<ComplexifiedImpl>(K)); }

RelativeRadius relative_out_radius(const ConvexBody& K, const ConvexBody& L, std::uint64_t seed,
                                   const SphereSearch& opts) {
  if (K.dim() != L.dim()) throw DimensionMismatch("relative out-radius: dimensions differ");
  RelativeRadius out;
  const auto qk = K.quadratic_form();
  const auto ql = L.quadratic_form();
  if (qk && ql) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(*ql, *qk);
    const Eigen::Index last = ges.eigenvalues().size() - 1;
    out.value = std::sqrt(ges.eigenvalues()(last));
    out.direction = ges.eigenvectors().col(last).normalized();
    out.exact = true;
    return out;
  }
  const BodyImpl& k = K.impl();
  const BodyImpl& l = L.impl();
  auto neg_ratio = [&](const Vec& u, Vec* g) {
    Vec gk;
    Vec gl;
    const double a = l.gauge(u, g ? &gl : nullptr);
    const double b = k.gauge(u, g ? &gk : nullptr);
    if (g) *g = -(gl * b - a * gk) / (b * b);
    return -a / b;
  };
  Rng rng = make_stream(seed, 0);
  auto refine = [&](Vec u0) { return projected_descent(neg_ratio, std::move(u0), opts.steps, opts.tol); };
  const SphereExtremum e = minimize_on_sphere(neg_ratio, K.dim(), rng, opts, refine);
  out.value = -e.value;
  out.direction = e.point;
  return out;
}

}  // namespace regpos
