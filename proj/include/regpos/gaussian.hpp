#pragma once

#include "regpos/body.hpp"

#include <cstdint>

namespace regpos {

struct SampleOptions {
  /// Center and whiten so the empirical covariance is exactly the identity.
  bool moment_match = false;
  /// Close the sample under a group of signed permutations: Walsh sign patterns,
  /// plus dyadic coordinate shifts when n is a power of two, plus x -> -x.
  bool orbit = false;
};

/// Fixed set of standard Gaussian vectors in R^n, reproducible from (seed, count, dim, options).
class GaussianSample {
 public:
  GaussianSample(std::uint64_t seed, int count, int dim, SampleOptions opts = {});

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  /// Actual number of vectors; with orbit closure this is rounded up to a multiple of the orbit size.
  [[nodiscard]] int count() const { return static_cast<int>(points_.cols()); }
  [[nodiscard]] int dim() const { return static_cast<int>(points_.rows()); }
  [[nodiscard]] const SampleOptions& options() const { return opts_; }
  /// dim x count, one vector per column.
  [[nodiscard]] const Mat& points() const { return points_; }

  static int orbit_size(int n);

 private:
  std::uint64_t seed_;
  SampleOptions opts_;
  Mat points_;
};

struct EllEstimate {
  double value = 0.0;
  double se = 0.0;
  int M = 0;
  int p = 1;
};

/// l_p(K) = (E ||G||_K^p)^{1/p}, p in {1, 2}.
EllEstimate ell(const ConvexBody& K, int p, const GaussianSample& sample);
/// l_p of the polar body, evaluated through the support function.
EllEstimate ell_star(const ConvexBody& K, int p, const GaussianSample& sample);
/// Mean of h_K over the sphere, using normalized sample vectors.
EllEstimate mstar(const ConvexBody& K, const GaussianSample& sample);

enum class Functional { ell, ell2, ell_star, ell2_star, mstar };

struct CrnPair {
  EllEstimate a;
  EllEstimate b;
  double difference = 0.0;     ///< a - b
  double difference_se = 0.0;  ///< paired standard error
  double independent_se = 0.0; ///< sqrt(se_a^2 + se_b^2)
  double ratio = 0.0;          ///< a / b
};

/// Both functionals on the same sample.
CrnPair crn_pair(const ConvexBody& A, const ConvexBody& B, Functional f, const GaussianSample& sample);

/// E|G_n| = sqrt(2) Γ((n+1)/2) / Γ(n/2).
double expected_gaussian_norm(int n);

}  // namespace regpos
