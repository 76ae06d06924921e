#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsexp/estimators.hpp"
#include "tsexp/experiment.hpp"
#include "tsexp/potential_process.hpp"

namespace tsexp {

enum class TestMethod {
  kExactRandomization,
  kConservativeClt,
  kPooledExact,
  kPooledConservative,
  kFisher,
};

std::string to_string(TestMethod m);

// How randomization p-values treat ties with the observed statistic.
// kStrict counts |stat_m| > |stat_obs| over M draws (the plain Monte Carlo
// estimate); kAddOne counts >= and adds one to both numerator and
// denominator, which is valid at any finite M.
enum class TieRule { kStrict, kAddOne };

enum class Sidedness { kTwoSided, kGreater, kLess };

struct TestResult {
  TestMethod method = TestMethod::kExactRandomization;
  double statistic = 0.0;    // observed tau_bar (exact) or the Z statistic (CLT)
  double tau_bar_hat = 0.0;  // observed point estimate
  double gamma_hat = 0.0;    // variance-bound aggregate of the observed data
  double p_value = 1.0;
  std::uint64_t replicates = 0;  // exact methods only
  std::uint64_t seed = 0;
  bool degenerate = false;     // CLT statistic undefined (all bounds zero)
  bool small_sample = false;   // advisory: fewer than 30 contributing times (CLT)
  std::vector<double> null_draws;  // retained replicate statistics, if requested
};

struct ExactTestOptions {
  TieRule tie_rule = TieRule::kStrict;
  Sidedness sidedness = Sidedness::kTwoSided;
  bool keep_null_draws = false;
  unsigned threads = 1;
};

// Monte Carlo randomization test of the sharp null of no temporal causal
// effects. Resamples M treatment paths from the experiment's mechanism,
// recomputes the average HT statistic on the observed outcomes with each
// replicate's own realized propensities, and counts exceedances.
// Deterministic in (seed, M) for any thread count.
TestResult exact_test(const UnitExperiment& e, const EstimandSpec& estimand, std::uint64_t M,
                      std::uint64_t seed, const ExactTestOptions& options = {});

// Conservative CLT test of the no-average-effect null: Z = tau_bar /
// sqrt(gamma_hat) against N(0,1). The variance bound makes the rejection
// rate at most the nominal level.
TestResult conservative_test(const UnitExperiment& e, const EstimandSpec& estimand,
                             Sidedness sidedness = Sidedness::kTwoSided);

struct PowerPoint {
  double x = 0.0;  // grid value (treatment drift or persistence)
  double exact_rejection = 0.0;
  double conservative_rejection = 0.0;
  double mc_se_exact = 0.0;
  double mc_se_conservative = 0.0;
  std::uint64_t outer = 0;
};

struct PowerStudyConfig {
  std::size_t T = 100;
  std::uint64_t M = 1000;
  std::uint64_t outer = 1000;
  double alpha = 0.05;
  TieRule tie_rule = TieRule::kStrict;
  unsigned threads = 1;
};

// Rejection rates of both tests over a grid of data-generating processes.
// xs labels the grid points in the output.
std::vector<PowerPoint> power_curve(std::span<const PotentialProcessSpec> grid,
                                    std::span<const double> xs,
                                    const AssignmentMechanism& mechanism,
                                    const EstimandSpec& estimand, const PowerStudyConfig& config,
                                    std::uint64_t seed);

}  // namespace tsexp
