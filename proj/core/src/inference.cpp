#include "tsexp/inference.hpp"

#include <cmath>
#include <limits>

#include "tsexp/errors.hpp"
#include "tsexp/parallel.hpp"
#include "tsexp/rng.hpp"
#include "tsexp/stats.hpp"

namespace tsexp {

namespace {

double exceedance_pvalue(double stat_obs, std::span<const double> draws, TieRule tie_rule,
                         Sidedness sidedness) {
  auto beats = [&](double draw, bool or_equal) {
    switch (sidedness) {
      case Sidedness::kTwoSided:
        return or_equal ? std::abs(draw) >= std::abs(stat_obs)
                        : std::abs(draw) > std::abs(stat_obs);
      case Sidedness::kGreater:
        return or_equal ? draw >= stat_obs : draw > stat_obs;
      case Sidedness::kLess:
        return or_equal ? draw <= stat_obs : draw < stat_obs;
    }
    return false;
  };
  std::uint64_t count = 0;
  const bool or_equal = tie_rule == TieRule::kAddOne;
  for (double d : draws)
    if (beats(d, or_equal)) ++count;
  if (tie_rule == TieRule::kAddOne)
    return static_cast<double>(count + 1) / static_cast<double>(draws.size() + 1);
  return static_cast<double>(count) / static_cast<double>(draws.size());
}

}  // namespace

std::string to_string(TestMethod m) {
  switch (m) {
    case TestMethod::kExactRandomization: return "exact-randomization";
    case TestMethod::kConservativeClt: return "conservative-clt";
    case TestMethod::kPooledExact: return "pooled-exact";
    case TestMethod::kPooledConservative: return "pooled-conservative";
    case TestMethod::kFisher: return "fisher";
  }
  return "unknown";
}

TestResult exact_test(const UnitExperiment& e, const EstimandSpec& estimand, std::uint64_t M,
                      std::uint64_t seed, const ExactTestOptions& options) {
  if (M == 0) throw ValidationError("exact_test: M must be >= 1");
  if (estimand.m_period.has_value())
    throw ValidationError("exact_test: m-period estimands are not resampled; use lag/step");

  const std::size_t T = e.length();
  const std::size_t p = estimand.p;
  const std::size_t q = estimand.q;

  // With a proxy, the statistic is the same estimator applied to the
  // adjusted numerators; the adjustment only reads the observed outcomes,
  // which the sharp null fixes across counterfactual paths.
  const std::vector<double> numerators =
      estimand.use_proxy
          ? proxy_numerators(e, p, ProxyRule::lagged_outcome())
          : std::vector<double>(e.outcomes().begin(), e.outcomes().end());

  TestResult result;
  result.method = TestMethod::kExactRandomization;
  result.seed = seed;
  result.replicates = M;
  const EstimateResult observed = estimate(e, estimand);
  result.tau_bar_hat = observed.tau_bar_hat;
  result.gamma_hat = observed.gamma_hat;
  result.statistic = result.tau_bar_hat;

  // Step 2 of the resampling algorithm: each replicate draws a fresh path and
  // records its own adapted propensity path; the statistic reuses the
  // observed outcomes, which are complete under the sharp null.
  std::vector<double> draws(M);
  parallel_for(M, options.threads, [&](std::size_t m) {
    const SampledPath sp = sample_path(e.mechanism(), e.outcomes(), T, split_seed(seed, m + 1));
    draws[m] = ht_series_average(numerators, sp.treatments.values(), sp.prob_treated, p, q);
  });

  result.p_value = exceedance_pvalue(result.statistic, draws, options.tie_rule, options.sidedness);
  if (options.keep_null_draws) result.null_draws = std::move(draws);
  return result;
}

TestResult conservative_test(const UnitExperiment& e, const EstimandSpec& estimand,
                             Sidedness sidedness) {
  if (estimand.m_period.has_value())
    throw ValidationError("conservative_test: m-period estimands unsupported");
  const EstimateResult est = estimate(e, estimand);

  TestResult result;
  result.method = TestMethod::kConservativeClt;
  result.tau_bar_hat = est.tau_bar_hat;
  result.gamma_hat = est.gamma_hat;
  result.small_sample = est.t_effective < 30;
  if (est.gamma_hat <= 0.0) {
    // All variance bounds vanish (every outcome zero): the statistic is
    // undefined and no evidence either way exists.
    result.degenerate = true;
    result.statistic = std::numeric_limits<double>::quiet_NaN();
    result.p_value = std::numeric_limits<double>::quiet_NaN();
    return result;
  }
  const double z = est.tau_bar_hat / std::sqrt(est.gamma_hat);
  result.statistic = z;
  switch (sidedness) {
    case Sidedness::kTwoSided: result.p_value = normal_two_sided_pvalue(z); break;
    case Sidedness::kGreater: result.p_value = 1.0 - normal_cdf(z); break;
    case Sidedness::kLess: result.p_value = normal_cdf(z); break;
  }
  return result;
}

std::vector<PowerPoint> power_curve(std::span<const PotentialProcessSpec> grid,
                                    std::span<const double> xs,
                                    const AssignmentMechanism& mechanism,
                                    const EstimandSpec& estimand, const PowerStudyConfig& config,
                                    std::uint64_t seed) {
  if (grid.empty() || grid.size() != xs.size())
    throw ValidationError("power_curve: grid and labels must be non-empty and equal length");

  std::vector<PowerPoint> points(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const PotentialProcessSpec& spec = grid[g];
    check_spec(spec);
    const std::uint64_t grid_seed = split_seed(seed, g + 1);

    std::vector<std::uint8_t> exact_reject(config.outer, 0);
    std::vector<std::uint8_t> conservative_reject(config.outer, 0);

    parallel_for(config.outer, config.threads, [&](std::size_t r) {
      const std::uint64_t rep_seed = split_seed(grid_seed, r + 1);
      SimulatedExperiment sim = simulate_process(spec, mechanism, config.T,
                                                 split_seed(rep_seed, 1), split_seed(rep_seed, 2));
      UnitExperiment e("sim", {}, std::move(sim.outcomes), sim.treatments, mechanism,
                       std::move(sim.prob_treated));

      ExactTestOptions opts;
      opts.tie_rule = config.tie_rule;
      const TestResult ex = exact_test(e, estimand, config.M, split_seed(rep_seed, 3), opts);
      exact_reject[r] = ex.p_value <= config.alpha ? 1 : 0;
      const TestResult cons = conservative_test(e, estimand);
      conservative_reject[r] = (!cons.degenerate && cons.p_value <= config.alpha) ? 1 : 0;
    });

    auto rate = [&](const std::vector<std::uint8_t>& v) {
      std::uint64_t c = 0;
      for (auto b : v) c += b;
      return static_cast<double>(c) / static_cast<double>(v.size());
    };
    PowerPoint pt;
    pt.x = xs[g];
    pt.outer = config.outer;
    pt.exact_rejection = rate(exact_reject);
    pt.conservative_rejection = rate(conservative_reject);
    const double n = static_cast<double>(config.outer);
    pt.mc_se_exact = std::sqrt(pt.exact_rejection * (1.0 - pt.exact_rejection) / n);
    pt.mc_se_conservative =
        std::sqrt(pt.conservative_rejection * (1.0 - pt.conservative_rejection) / n);
    points[g] = pt;
  }
  return points;
}

}  // namespace tsexp
