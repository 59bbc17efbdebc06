#include "regpos/positions.hpp"

#include "regpos/interpolation.hpp"
#include "regpos/parallel.hpp"

#include <cmath>
#include <vector>

namespace regpos {

namespace {

constexpr int kBlock = 256;

struct Chart {
  int n = 0;
  bool diagonal = true;

  [[nodiscard]] int size() const { return diagonal ? n : n * (n + 1) / 2; }

  // traceless symmetric matrix from packed coordinates
  [[nodiscard]] Mat unpack(const Vec& x) const {
    Mat S = Mat::Zero(n, n);
    if (diagonal) {
      S.diagonal() = x;
    } else {
      S.diagonal() = x.head(n);
      int k = n;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          S(i, j) = S(j, i) = x(k++) / std::sqrt(2.0);
        }
      }
    }
    S.diagonal().array() -= S.trace() / n;
    return S;
  }

  [[nodiscard]] Vec pack(const Mat& S) const {
    Vec x(size());
    x.head(n) = S.diagonal();
    if (!diagonal) {
      int k = n;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) x(k++) = std::sqrt(2.0) * S(i, j);
      }
    }
    return x;
  }

  // gradient w.r.t. packed coordinates of a function of S, given the symmetric gradient H
  [[nodiscard]] Vec pack_gradient(const Mat& H) const {
    Vec g = pack(H);
    g.head(n).array() -= g.head(n).mean();
    return g;
  }
};

struct Accum {
  double value = 0.0;
  Mat G;  // sum of 2 v grad_j g_j^T (full) or its diagonal in column 0
};

// mean_j gauge(exp(S) g_j)^2 and its gradient w.r.t. the packed chart coordinates
double objective(const ConvexBody& K, const Mat& pts, const Chart& chart, const Vec& x, Vec* grad) {
  const int n = chart.n;
  const int M = static_cast<int>(pts.cols());
  const Mat S = chart.unpack(x);
  Vec q;
  Mat Q;
  Mat V;
  Vec lam;
  if (chart.diagonal) {
    q = S.diagonal().array().exp().matrix();
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    V = es.eigenvectors();
    lam = es.eigenvalues();
    Q = V * lam.array().exp().matrix().asDiagonal() * V.transpose();
  }
  const int blocks = (M + kBlock - 1) / kBlock;
  std::vector<Accum> part(blocks);
  const BodyImpl& k = K.impl();
  parallel_for(blocks, [&](int b) {
    Accum& a = part[b];
    a.G = grad ? (chart.diagonal ? Mat::Zero(n, 1) : Mat::Zero(n, n)) : Mat();
    const int lo = b * kBlock;
    const int hi = std::min(M, lo + kBlock);
    Vec gx;
    for (int j = lo; j < hi; ++j) {
      const Vec xj = chart.diagonal ? Vec(q.cwiseProduct(pts.col(j))) : Vec(Q * pts.col(j));
      const double v = k.gauge(xj, grad ? &gx : nullptr);
      a.value += v * v;
      if (grad) {
        if (chart.diagonal) {
          a.G.col(0) += (2.0 * v) * gx.cwiseProduct(xj);
        } else {
          a.G.noalias() += (2.0 * v) * gx * pts.col(j).transpose();
        }
      }
    }
  });
  double value = 0.0;
  Mat G;
  for (int b = 0; b < blocks; ++b) {
    value += part[b].value;
    if (grad) G = b == 0 ? part[b].G : Mat(G + part[b].G);
  }
  value /= M;
  if (grad) {
    G /= M;
    if (chart.diagonal) {
      Mat H = Mat::Zero(n, n);
      H.diagonal() = G.col(0);
      *grad = chart.pack_gradient(H);
    } else {
      // adjoint of the Frechet derivative of exp at S
      Mat Gam(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double d = lam(i) - lam(j);
          Gam(i, j) = std::abs(d) < 1e-12 ? std::exp(0.5 * (lam(i) + lam(j))) : std::exp(lam(j)) * std::expm1(d) / d;
        }
      }
      Mat H = V * Gam.cwiseProduct(V.transpose() * G * V) * V.transpose();
      H = 0.5 * (H + H.transpose()).eval();
      *grad = chart.pack_gradient(H);
    }
  }
  return value;
}

}  // namespace

EllPositionResult solve_ell_position(const ConvexBody& K, const GaussianSample& sample, const EllPositionOptions& opts) {
  const int n = K.dim();
  if (sample.dim() != n) throw DimensionMismatch("ell-position: sample and body dimensions differ");
  Chart chart;
  chart.n = n;
  chart.diagonal = opts.mode == EllPositionOptions::Mode::diagonal ||
                   (opts.mode == EllPositionOptions::Mode::automatic && K.symmetry().sign_flips);
  const Mat& pts = sample.points();

  Vec x = Vec::Zero(chart.size());
  if (opts.start_log) {
    if (opts.start_log->rows() != n || opts.start_log->cols() != n) throw DimensionMismatch("ell-position: bad warm start");
    x = chart.pack(-*opts.start_log);
  }
  Vec g;
  double f = objective(K, pts, chart, x, &g);
  EllPositionResult res;
  res.objective_at_start = std::sqrt(f);
  const int d = chart.size();
  Mat H = Mat::Identity(d, d) / (2.0 * f);
  int it = 0;
  bool fresh = true;
  for (; it < opts.max_iter; ++it) {
    res.residual = g.norm() / f;
    if (res.residual <= opts.tol) {
      res.converged = true;
      break;
    }
    Vec dir = -H * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      H = Mat::Identity(d, d) / (2.0 * f);
      dir = -H * g;
      slope = g.dot(dir);
      fresh = true;
    }
    double t = 1.0;
    Vec xn;
    Vec gn;
    double fn = f;
    bool ok = false;
    for (int ls = 0; ls < 50; ++ls) {
      xn = x + t * dir;
      fn = objective(K, pts, chart, xn, &gn);
      if (fn < f && fn <= f + 1e-4 * t * slope) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) {
      if (fresh) break;  // steepest descent failed too
      H = Mat::Identity(d, d) / (2.0 * f);
      fresh = true;
      continue;
    }
    const Vec s = xn - x;
    const Vec y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (fresh) H = Mat::Identity(d, d) * (sy / y.squaredNorm());
      const double rho = 1.0 / sy;
      const Vec Hy = H * y;
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      H += (rho * rho * y.dot(Hy) + rho) * s * s.transpose() - rho * (Hy * s.transpose() + s * Hy.transpose());
      fresh = false;
    }
    x = std::move(xn);
    g = std::move(gn);
    f = fn;
  }
  res.iterations = it;
  res.residual = g.norm() / f;
  res.converged = res.converged || res.residual <= opts.tol;
  res.objective = std::sqrt(f);
  res.log_T = -chart.unpack(x);
  res.T = PositionMap::exp_symmetric(res.log_T).normalized();
  if (opts.compute_product) {
    const ConvexBody TK = linear_image(res.T, K);
    res.product = ell(TK, 1, sample).value * ell_star(TK, 1, sample).value;
  }
  return res;
}

double ell2_of_image(const ConvexBody& K, const PositionMap& T, const GaussianSample& sample) {
  return ell(linear_image(T, K), 2, sample).value;
}

EllProduct ell_product(const ConvexBody& K, const GaussianSample& sample) {
  EllProduct out;
  out.ell = ell(K, 1, sample);
  out.ell_star = ell_star(K, 1, sample);
  out.value = out.ell.value * out.ell_star.value;
  out.se = out.value * std::hypot(out.ell.se / out.ell.value, out.ell_star.se / out.ell_star.value);
  const double n = K.dim();
  out.per_nlogn = out.value / (n * std::log1p(n));
  return out;
}

double balance_scale(const ConvexBody& K, double theta, const GaussianSample& sample) {
  if (!(theta >= 0.0 && theta < 1.0)) throw HypothesisViolated("balance_scale: theta must lie in [0, 1)");
  const ConvexBody J = interpolate({K, ConvexBody::unit_ball(2.0, K.dim()), theta});
  const double l = ell(J, 1, sample).value;
  const double ls = ell_star(J, 1, sample).value;
  return std::pow(l / ls, 1.0 / (2.0 * (1.0 - theta)));
}

}  // namespace regpos
