#include "tsexp/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tsexp/errors.hpp"
#include "tsexp/parallel.hpp"
#include "tsexp/rng.hpp"
#include "tsexp/stats.hpp"

namespace tsexp {

namespace {

struct WeightedUnits {
  std::vector<std::size_t> kept;     // indices into the sorted unit order
  std::vector<double> variances;     // gamma_{p,i}^2 for kept units
  std::vector<double> weights;       // normalized c_i
  double gamma_p_sq = 0.0;           // sum (T_i - p) / gamma_{p,i}^2
  std::vector<std::string> warnings;
};

// Units in unit_id order so aggregation does not depend on input order.
std::vector<std::size_t> sorted_unit_order(const Panel& panel) {
  std::vector<std::size_t> order(panel.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return panel.units()[a].unit_id() < panel.units()[b].unit_id();
  });
  return order;
}

// Weights c_i proportional to (T_i - p) / gamma_{p,i}^2. Units whose variance
// vanishes (all-zero outcomes) have no defined weight and are dropped.
WeightedUnits make_weights(const Panel& panel, std::span<const std::size_t> order, std::size_t p,
                           std::span<const double> unit_variances) {
  WeightedUnits w;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& unit = panel.units()[order[k]];
    if (unit_variances[k] <= 0.0) {
      w.warnings.push_back("unit '" + unit.unit_id() +
                           "' dropped: zero variance (all outcomes zero)");
      continue;
    }
    w.kept.push_back(order[k]);
    w.variances.push_back(unit_variances[k]);
    w.gamma_p_sq += static_cast<double>(unit.length() - p) / unit_variances[k];
  }
  if (w.kept.empty()) throw ValidationError("pooled test: every unit has zero variance");
  for (std::size_t k = 0; k < w.kept.size(); ++k) {
    const auto& unit = panel.units()[w.kept[k]];
    w.weights.push_back(static_cast<double>(unit.length() - p) / w.variances[k] / w.gamma_p_sq);
  }
  return w;
}

}  // namespace

PooledResult pooled_exact_test(const Panel& panel, const EstimandSpec& estimand, std::uint64_t M,
                               std::uint64_t seed, const ExactTestOptions& options) {
  if (M == 0) throw ValidationError("pooled_exact_test: M must be >= 1");
  if (!panel.independent_assignment())
    throw ValidationError(
        "pooled_exact_test: units are marked dependent and no joint mechanism is available; "
        "per-unit resampling would misstate the null distribution");

  const std::size_t p = estimand.p;
  const std::size_t q = estimand.q;
  const auto order = sorted_unit_order(panel);

  // Sharp-null variances, fixed across replicates.
  std::vector<double> null_vars(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& unit = panel.units()[order[k]];
    double s = 0.0;
    for (std::size_t t = p + 1; t <= unit.length(); ++t)
      s += sharp_null_variance_at(unit, t, p, q);
    null_vars[k] = s / static_cast<double>(unit.length() - p);
  }
  WeightedUnits wu = make_weights(panel, order, p, null_vars);

  std::vector<double> observed(wu.kept.size());
  double pooled_obs = 0.0;
  for (std::size_t k = 0; k < wu.kept.size(); ++k) {
    const auto& unit = panel.units()[wu.kept[k]];
    observed[k] = ht_series_average(unit.outcomes(), unit.treatments().values(),
                                    unit.prob_treated(), p, q);
    pooled_obs += wu.weights[k] * observed[k];
  }

  std::vector<double> draws(M);
  parallel_for(M, options.threads, [&](std::size_t m) {
    const std::uint64_t rep_seed = split_seed(seed, m + 1);
    double pooled = 0.0;
    for (std::size_t k = 0; k < wu.kept.size(); ++k) {
      const auto& unit = panel.units()[wu.kept[k]];
      const SampledPath sp = sample_path(unit.mechanism(), unit.outcomes(), unit.length(),
                                         split_seed(rep_seed, k + 1));
      pooled += wu.weights[k] * ht_series_average(unit.outcomes(), sp.treatments.values(),
                                                  sp.prob_treated, p, q);
    }
    draws[m] = pooled;
  });

  std::uint64_t count = 0;
  const bool add_one = options.tie_rule == TieRule::kAddOne;
  for (double d : draws) {
    const bool beats = add_one ? std::abs(d) >= std::abs(pooled_obs)
                               : std::abs(d) > std::abs(pooled_obs);
    if (beats) ++count;
  }

  PooledResult result;
  result.method = TestMethod::kPooledExact;
  result.tau_bar_pooled = pooled_obs;
  result.statistic = pooled_obs;
  result.replicates = M;
  result.seed = seed;
  result.warnings = std::move(wu.warnings);
  result.p_value = add_one
                       ? static_cast<double>(count + 1) / static_cast<double>(M + 1)
                       : static_cast<double>(count) / static_cast<double>(M);
  for (std::size_t k = 0; k < wu.kept.size(); ++k) {
    const auto& unit = panel.units()[wu.kept[k]];
    result.per_unit.push_back(
        {unit.unit_id(), observed[k], wu.variances[k], wu.weights[k], 1.0});
  }
  if (options.keep_null_draws) result.null_draws = std::move(draws);
  return result;
}

PooledResult pooled_conservative_test(const Panel& panel, const EstimandSpec& estimand,
                                      Sidedness sidedness) {
  if (!panel.independent_assignment())
    throw ValidationError(
        "pooled_conservative_test: reference distribution N(0, 1/gamma^2) requires "
        "independently assigned units (independence flag not set)");

  const std::size_t p = estimand.p;
  const std::size_t q = estimand.q;
  const auto order = sorted_unit_order(panel);

  // Variance-bound analogue of the known-variance weights: per-t bound
  // estimates averaged over t.
  std::vector<double> bound_vars(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& unit = panel.units()[order[k]];
    const auto bounds = variance_bound(unit, p, q);
    double s = 0.0;
    for (double b : bounds) s += b;
    bound_vars[k] = s / static_cast<double>(bounds.size());
  }
  WeightedUnits wu = make_weights(panel, order, p, bound_vars);

  PooledResult result;
  result.method = TestMethod::kPooledConservative;
  result.warnings = std::move(wu.warnings);
  double pooled = 0.0;
  for (std::size_t k = 0; k < wu.kept.size(); ++k) {
    const auto& unit = panel.units()[wu.kept[k]];
    const double tau = ht_series_average(unit.outcomes(), unit.treatments().values(),
                                         unit.prob_treated(), p, q);
    pooled += wu.weights[k] * tau;
    result.per_unit.push_back({unit.unit_id(), tau, wu.variances[k], wu.weights[k], 1.0});
  }
  result.tau_bar_pooled = pooled;
  // Pooled estimate ~ N(0, 1/gamma_p^2) under the null.
  const double z = pooled * std::sqrt(wu.gamma_p_sq);
  result.statistic = z;
  switch (sidedness) {
    case Sidedness::kTwoSided: result.p_value = normal_two_sided_pvalue(z); break;
    case Sidedness::kGreater: result.p_value = 1.0 - normal_cdf(z); break;
    case Sidedness::kLess: result.p_value = normal_cdf(z); break;
  }
  return result;
}

PooledResult fisher_combine(std::span<const double> p_values, std::uint64_t replicates) {
  if (p_values.empty()) throw ValidationError("fisher_combine: no p-values");
  PooledResult result;
  result.method = TestMethod::kFisher;
  result.replicates = replicates;
  double x2 = 0.0;
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    double pv = p_values[i];
    if (pv < 0.0 || pv > 1.0)
      throw ValidationError("fisher_combine: p-value outside [0,1]");
    if (pv == 0.0) {
      if (replicates == 0)
        throw ValidationError(
            "fisher_combine: p-value of 0 needs a replicate count to clamp against");
      pv = 1.0 / static_cast<double>(replicates + 1);
      result.warnings.push_back("p-value 0 at position " + std::to_string(i + 1) +
                                " clamped to 1/(M+1)");
    }
    x2 += -2.0 * std::log(pv);
    result.per_unit.push_back({"unit-" + std::to_string(i + 1), 0.0, 0.0, 0.0, pv});
  }
  result.statistic = x2;
  result.tau_bar_pooled = std::numeric_limits<double>::quiet_NaN();
  result.p_value = chi_square_upper_tail_even(p_values.size(), x2);
  return result;
}

}  // namespace tsexp
