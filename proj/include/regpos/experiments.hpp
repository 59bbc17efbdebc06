#pragma once

#include "regpos/body.hpp"
#include "regpos/interpolation.hpp"
#include "regpos/records.hpp"
#include "regpos/regular.hpp"
#include "regpos/section.hpp"
#include "regpos/subspace.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace regpos {

/// Every invariant of the library on the standard body zoo.
PropertyReport run_property_suites(std::uint64_t seed = 1);

struct LowMStarOptions {
  std::vector<int> ks;  ///< empty: powers of two in [1, n]
  int samples = 1000;
  int gaussian_samples = 20000;
  GelfandOptions gelfand;
};

struct LowMStarSummary {
  double C_emp = 0.0;
  int argmax_k = 0;
  EllEstimate ell_star;
  std::vector<GelfandEstimate> cr;
  ExperimentRecord record;
};

/// C_emp = max_k sqrt(k) cr_k(K) / l*(K).
LowMStarSummary run_lowmstar_check(const ConvexBody& K, std::uint64_t seed, const LowMStarOptions& opts = {});

struct QsOptions {
  double alpha = 1.0;
  int k = 4;
  int trials = 500;
  double c = 0.5;
  bool section_of_quotient = true;  ///< also compute d_G(P_E(K̄ ∩ F))
  int report_samples = 200;         ///< subspace samples behind P̄_emp
  RegularOptions regular;
  GelfandOptions gelfand;
  RadiusOptions radius{100, 4, 100, 0x9515};
};

struct QsOutcome {
  int trial = 0;
  double quotient_of_section = 1.0;  ///< d_G((P_F K̄) ∩ E, B_2)
  double section_of_quotient = 1.0;  ///< d_G(P_E(K̄ ∩ F), B_2); 0 when not computed
  bool within = false;               ///< quotient_of_section <= threshold
};

struct QsSummary {
  int n = 0;
  double alpha = 0.0;
  int k = 0;
  double P_emp = 0.0;
  double threshold = 0.0;  ///< (P̄_emp (n/k)^α)^2
  double level = 0.0;      ///< 1 - exp(-ck), clamped to 1 - 10/trials
  double q50 = 0.0;
  double q90 = 0.0;
  double q_level = 0.0;
  double soq_q50 = 0.0;
  double soq_q90 = 0.0;
  double exceedance = 0.0;
  double exceedance_ci_hi = 0.0;  ///< 95% Wilson upper limit
  double allowed = 0.0;           ///< 2 exp(-ck)
  std::vector<QsOutcome> outcomes;
  ExperimentRecord record;
};

/// The flag used by trial `trial` of run_qs_experiment.
Flag qs_flag(std::uint64_t seed, int n, int k, int trial);

/// Builds K̄_α, measures P̄_emp and samples Haar flags.
QsSummary run_qs_experiment(const ConvexBody& K, std::uint64_t seed, const QsOptions& opts = {});

struct CurveOptions {
  std::vector<double> alphas{0.6, 0.75, 1.0};
  std::vector<int> ks;  ///< empty: powers of two in [1, n/2]
  int samples = 500;
  RegularOptions regular;
  GelfandOptions gelfand;
};

/// One record per (α, k) and one per α with P̄_emp(α) and P̄_emp(α) sqrt(α - 1/2).
std::vector<ExperimentRecord> run_regularity_curve(const ConvexBody& K, std::uint64_t seed,
                                                   const CurveOptions& opts = {});

/// Wilson score interval for x successes out of m.
std::pair<double, double> wilson_interval(int x, int m, double z = 1.96);

}  // namespace regpos
