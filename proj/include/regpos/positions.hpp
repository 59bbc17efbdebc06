#pragma once

#include "regpos/body.hpp"
#include "regpos/gaussian.hpp"
#include "regpos/position_map.hpp"

#include <optional>

namespace regpos {

struct EllPositionOptions {
  enum class Mode { automatic, diagonal, full };

  double tol = 1e-6;  ///< relative gradient norm
  int max_iter = 500;
  /// automatic: diagonal when K is invariant under coordinate sign flips.
  Mode mode = Mode::automatic;
  /// Warm start: symmetric traceless log T (diagonal in diagonal mode).
  std::optional<Mat> start_log;
  bool compute_product = true;
};

struct EllPositionResult {
  PositionMap T;
  Mat log_T;                       ///< symmetric traceless, T = exp(log_T)
  double objective = 0.0;          ///< SAA l_2(T K)
  double objective_at_start = 0.0;
  double residual = 0.0;           ///< |grad| / objective^2 in the exp chart
  double product = 0.0;            ///< l(TK) l*(TK) on the same sample
  int iterations = 0;
  bool converged = false;
};

/// Minimizes the sample average of ||T^{-1} g_j||_K^2 over T = exp(L), L symmetric traceless.
EllPositionResult solve_ell_position(const ConvexBody& K, const GaussianSample& sample,
                                     const EllPositionOptions& opts = {});

/// SAA l_2(T K).
double ell2_of_image(const ConvexBody& K, const PositionMap& T, const GaussianSample& sample);

struct EllProduct {
  double value = 0.0;
  double se = 0.0;
  double per_nlogn = 0.0;  ///< value / (n log(1 + n))
  EllEstimate ell;
  EllEstimate ell_star;
};
EllProduct ell_product(const ConvexBody& K, const GaussianSample& sample);

/// a > 0 with l([aK, B_2]_θ) = l*([aK, B_2]_θ) on the sample:
/// a = (l(J) / l*(J))^{1/(2(1-θ))} for J = [K, B_2]_θ.
double balance_scale(const ConvexBody& K, double theta, const GaussianSample& sample);

}  // namespace regpos
