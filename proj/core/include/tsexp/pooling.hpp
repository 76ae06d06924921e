#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsexp/inference.hpp"

namespace tsexp {

struct UnitPoolEntry {
  std::string unit_id;
  double tau_bar_hat = 0.0;
  double variance = 0.0;  // gamma_{p,i}^2: per-t (null or bound) variance averaged over t
  double weight = 0.0;    // normalized inverse-variance weight c_i
  double p_value = 1.0;   // unit-level p-value (Fisher input, where applicable)
};

struct PooledResult {
  TestMethod method = TestMethod::kPooledExact;
  double tau_bar_pooled = 0.0;
  double statistic = 0.0;  // pooled estimate (exact), Z (conservative), X^2 (Fisher)
  double p_value = 1.0;
  std::uint64_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<UnitPoolEntry> per_unit;
  std::vector<std::string> warnings;  // dropped units, clamped p-values, ...
  std::vector<double> null_draws;
};

// Randomization test of the per-unit sharp nulls using the inverse-variance
// pooled statistic. Unit weights come from the sharp-null variances, which
// the null fixes, so they are computed once from the observed data. Each
// replicate resamples every unit's path independently.
PooledResult pooled_exact_test(const Panel& panel, const EstimandSpec& estimand, std::uint64_t M,
                               std::uint64_t seed, const ExactTestOptions& options = {});

// Pooled CLT test with variance-bound weights, compared against
// N(0, 1/gamma_p^2). Requires independently assigned units.
PooledResult pooled_conservative_test(const Panel& panel, const EstimandSpec& estimand,
                                      Sidedness sidedness = Sidedness::kTwoSided);

// Fisher's combination X^2 = -2 sum log p_i against chi-square with 2n df.
// p-values of exactly zero (possible under the strict tie rule) are clamped
// to 1/(replicates+1) when replicates is supplied, otherwise rejected.
PooledResult fisher_combine(std::span<const double> p_values, std::uint64_t replicates = 0);

}  // namespace tsexp
