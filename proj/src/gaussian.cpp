#include "regpos/gaussian.hpp"

#include "regpos/parallel.hpp"
#include "regpos/rng.hpp"

#include <bit>
#include <cmath>
#include <vector>

namespace regpos {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int walsh_bits(int n) {
  int L = 0;
  while ((1 << L) < n) ++L;
  return L;
}

Mat orbit_closure(const Mat& base) {
  const int n = static_cast<int>(base.rows());
  const int patterns = 1 << walsh_bits(n);
  const int shifts = power_of_two(n) ? n : 1;
  Mat out(n, base.cols() * GaussianSample::orbit_size(n));
  Eigen::Index col = 0;
  for (Eigen::Index j = 0; j < base.cols(); ++j) {
    for (int s = 0; s < shifts; ++s) {
      for (int b = 0; b < patterns; ++b) {
        for (int sign = 0; sign < 2; ++sign) {
          for (int i = 0; i < n; ++i) {
            const double eps = (std::popcount(static_cast<unsigned>(b & i)) & 1) ? -1.0 : 1.0;
            out(i, col) = (sign ? -eps : eps) * base(i ^ s, j);
          }
          ++col;
        }
      }
    }
  }
  return out;
}

// values -> estimate of (E v^p)^{1/p}
EllEstimate summarize(const std::vector<double>& v, int p) {
  const int M = static_cast<int>(v.size());
  EllEstimate e;
  e.M = M;
  e.p = p;
  double mean = 0.0;
  for (int j = 0; j < M; ++j) mean += p == 2 ? v[j] * v[j] : v[j];
  mean /= M;
  double var = 0.0;
  for (int j = 0; j < M; ++j) {
    const double d = (p == 2 ? v[j] * v[j] : v[j]) - mean;
    var += d * d;
  }
  var /= std::max(1, M - 1);
  const double se_mean = std::sqrt(var / M);
  if (p == 2) {
    e.value = std::sqrt(mean);
    e.se = e.value > 0 ? se_mean / (2.0 * e.value) : 0.0;
  } else {
    e.value = mean;
    e.se = se_mean;
  }
  return e;
}

std::vector<double> evaluate(const ConvexBody& K, Functional f, const GaussianSample& sample) {
  if (sample.dim() != K.dim()) throw DimensionMismatch("gaussian sample and body dimensions differ");
  const Mat& G = sample.points();
  std::vector<double> v(sample.count());
  const BodyImpl& impl = K.impl();
  parallel_for(sample.count(), [&](int j) {
    const Vec g = G.col(j);
    switch (f) {
      case Functional::ell:
      case Functional::ell2: v[j] = impl.gauge(g, nullptr); break;
      case Functional::ell_star:
      case Functional::ell2_star: v[j] = impl.support(g, nullptr); break;
      case Functional::mstar: {
        const double ng = g.norm();
        v[j] = ng > 0 ? impl.support(g / ng, nullptr) : 0.0;
        break;
      }
    }
  });
  return v;
}

int power_of(Functional f) { return (f == Functional::ell2 || f == Functional::ell2_star) ? 2 : 1; }

}  // namespace

int GaussianSample::orbit_size(int n) { return 2 * (1 << walsh_bits(n)) * (power_of_two(n) ? n : 1); }

GaussianSample::GaussianSample(std::uint64_t seed, int count, int dim, SampleOptions opts) : seed_(seed), opts_(opts) {
  if (count < 1 || dim < 1) throw ConfigError("gaussian sample needs count >= 1 and dim >= 1");
  Rng rng = make_stream(seed, 0x6761);
  if (opts.orbit) {
    const int osz = orbit_size(dim);
    const int base = (count + osz - 1) / osz;
    points_ = orbit_closure(gaussian_matrix(rng, dim, base));
  } else {
    points_ = gaussian_matrix(rng, dim, count);
  }
  if (opts.moment_match) {
    const int M = static_cast<int>(points_.cols());
    if (M <= dim) throw ConfigError("moment matching needs more vectors than dimensions");
    if (opts.orbit) {
      // the closed sample is already centered and has a diagonal (scalar for 2^k) covariance
      Vec d = points_.rowwise().squaredNorm() / M;
      if (power_of_two(dim)) d.setConstant(d.mean());
      points_ = d.cwiseSqrt().cwiseInverse().asDiagonal() * points_;
    } else {
      const Vec mean = points_.rowwise().mean();
      points_.colwise() -= mean;
      const Mat C = points_ * points_.transpose() / M;
      Eigen::SelfAdjointEigenSolver<Mat> es(C);
      const Mat W = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                    es.eigenvectors().transpose();
      points_ = W * points_;
    }
  }
}

EllEstimate ell(const ConvexBody& K, int p, const GaussianSample& sample) {
  if (p != 1 && p != 2) throw ConfigError("ell: p must be 1 or 2");
  return summarize(evaluate(K, p == 1 ? Functional::ell : Functional::ell2, sample), p);
}

EllEstimate ell_star(const ConvexBody& K, int p, const GaussianSample& sample) {
  if (p != 1 && p != 2) throw ConfigError("ell_star: p must be 1 or 2");
  return summarize(evaluate(K, p == 1 ? Functional::ell_star : Functional::ell2_star, sample), p);
}

EllEstimate mstar(const ConvexBody& K, const GaussianSample& sample) {
  return summarize(evaluate(K, Functional::mstar, sample), 1);
}

CrnPair crn_pair(const ConvexBody& A, const ConvexBody& B, Functional f, const GaussianSample& sample) {
  if (A.dim() != B.dim()) throw DimensionMismatch("crn_pair: dimensions differ");
  const int p = power_of(f);
  const std::vector<double> va = evaluate(A, f, sample);
  const std::vector<double> vb = evaluate(B, f, sample);
  CrnPair out;
  out.a = summarize(va, p);
  out.b = summarize(vb, p);
  out.difference = out.a.value - out.b.value;
  out.ratio = out.a.value / out.b.value;
  out.independent_se = std::hypot(out.a.se, out.b.se);
  // linearized influence of each sample point on a - b
  const int M = sample.count();
  std::vector<double> d(M);
  for (int j = 0; j < M; ++j) {
    if (p == 2) {
      d[j] = (out.a.value > 0 ? va[j] * va[j] / (2 * out.a.value) : 0.0) -
             (out.b.value > 0 ? vb[j] * vb[j] / (2 * out.b.value) : 0.0);
    } else {
      d[j] = va[j] - vb[j];
    }
  }
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= M;
  double var = 0.0;
  for (double x : d) var += (x - mean) * (x - mean);
  var /= std::max(1, M - 1);
  out.difference_se = std::sqrt(var / M);
  return out;
}

double expected_gaussian_norm(int n) {
  return std::sqrt(2.0) * std::exp(std::lgamma((n + 1) / 2.0) - std::lgamma(n / 2.0));
}

}  // namespace regpos
