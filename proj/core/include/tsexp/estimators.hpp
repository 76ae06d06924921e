#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tsexp/experiment.hpp"

namespace tsexp {

// Which average causal effect is being estimated. q widens the average over
// the assignments preceding the switched one; m_period selects the finite
// dependence estimator instead of the lag/step family.
struct MPeriodContrast {
  std::vector<std::uint8_t> target;      // w, length m+1
  std::vector<std::uint8_t> comparison;  // w', length m+1, != w
};

struct EstimandSpec {
  std::size_t p = 0;
  std::size_t q = 0;
  enum class Weights { kUniform } weights = Weights::kUniform;  // extension point
  bool use_proxy = false;
  std::optional<MPeriodContrast> m_period;
};

struct PerTimeEstimate {
  std::size_t t = 0;  // 1-based time label
  double tau_hat = 0.0;
  double sigma2_hat = 0.0;
};

struct EstimateResult {
  EstimandSpec estimand;
  std::vector<PerTimeEstimate> per_t;
  double tau_bar_hat = 0.0;
  double gamma_hat = 0.0;  // (T-p)^{-2} * sum of variance-bound estimates
  std::size_t t_effective = 0;
};

// ---------------------------------------------------------------------------
// Span-level kernels. These are the exact formulas evaluated on raw series;
// the resampling tests call them directly on counterfactual paths without
// building UnitExperiment objects.
// ---------------------------------------------------------------------------

// Horvitz-Thompson q-step p-lag point estimate at 1-based time t in p+1..T:
//   2^{-(p+q)} * y_t * (-1)^{1 - w_{t-p}} / pr(W_{t-p-q:t} = observed suffix).
// For t <= p+q the step count is truncated to the t-p-1 feasible steps.
double ht_point_estimate(std::span<const double> y, std::span<const std::uint8_t> w,
                         std::span<const double> prob_treated, std::size_t t, std::size_t p,
                         std::size_t q);

// Estimate of the variance upper bound at time t:
//   a^2 * y_t^2 * [1 + 2 pi (2^{p+q} - 1)] / pi^2,  a = 2^{-(p+q)},
// with pi the observed-suffix propensity. Reduces to tau_hat^2 at p = q = 0.
double ht_variance_bound_at(std::span<const double> y, std::span<const std::uint8_t> w,
                            std::span<const double> prob_treated, std::size_t t, std::size_t p,
                            std::size_t q);

// (T-p)^{-1} * sum over t = p+1..T of ht_point_estimate.
double ht_series_average(std::span<const double> y, std::span<const std::uint8_t> w,
                         std::span<const double> prob_treated, std::size_t p, std::size_t q);

// ---------------------------------------------------------------------------
// Per-experiment series
// ---------------------------------------------------------------------------

// tau_hat_{t,p} for t = p+1..T.
std::vector<double> ht_lag_estimate(const UnitExperiment& e, std::size_t p);

// tau_hat_{t,p}^{(q)} for t = p+1..T, boundary-truncated for t <= p+q.
std::vector<double> ht_step_estimate(const UnitExperiment& e, std::size_t p, std::size_t q);

// Variance-bound series sigma2_hat_t aligned with the step series.
std::vector<double> variance_bound(const UnitExperiment& e, std::size_t p, std::size_t q);

// Aggregate a per-t series and its bounds (index-ascending summation).
EstimateResult average_estimate(const EstimandSpec& estimand, std::span<const double> per_t,
                                std::span<const double> bounds, std::size_t t_start);

EstimateResult estimate(const UnitExperiment& e, const EstimandSpec& estimand);

// A proxy predictor of the next outcome from the filtration up to t-p-1.
// The rule only ever receives data indexed <= t-p-1, so it cannot read ahead.
class ProxyRule {
 public:
  using Fn = std::function<double(std::span<const double> y_history,
                                  std::span<const std::uint8_t> w_history)>;

  static ProxyRule zero();
  // y_{t-p-1}, or 0 when no history is available yet.
  static ProxyRule lagged_outcome();
  static ProxyRule custom(Fn fn);

  double predict(std::span<const double> y_history,
                 std::span<const std::uint8_t> w_history) const;

 private:
  explicit ProxyRule(Fn fn) : fn_(std::move(fn)) {}
  Fn fn_;
};

// Proxy-adjusted series: tau_hat with y_t replaced by y_t - mu_tilde.
std::vector<double> proxy_adjusted_estimate(const UnitExperiment& e, std::size_t p,
                                            const ProxyRule& proxy);

// Adjusted numerators y_t - mu_tilde_{t|t-p-1} for t = p+1..T (earlier entries
// keep y). Since the bound algebra treats the numerator as a known constant
// given the history, the estimator and bound kernels apply unchanged to this
// series; resampling tests use it to run proxy-adjusted statistics.
std::vector<double> proxy_numerators(const UnitExperiment& e, std::size_t p,
                                     const ProxyRule& proxy);

// Sharp-null variance of the estimation error at time t,
//   y_t^2 * 2^{-2(p+q)} * sum over suffixes (1/pr(suffix with 1) +
//   1/pr(suffix with 0)),
// with counterfactual path propensities (exact for Bernoulli mechanisms,
// sharp-null-only otherwise). q = 0 gives the p-lag form.
double sharp_null_variance_at(const UnitExperiment& e, std::size_t t, std::size_t p,
                              std::size_t q = 0);

// Standardized series v_{t,p} = tau_hat_{t,p} / sqrt(sharp-null variance);
// zero outcomes give v = 0 (sign(0) = 0).
std::vector<double> standardized_estimate(const UnitExperiment& e, std::size_t p);

// Finite-dependence estimator of Y_t(., w) - Y_t(., w') under m-period causal
// impact; w and w' have length m+1. Series runs over t = m+1..T.
std::vector<double> m_period_estimate(const UnitExperiment& e, std::size_t m,
                                      std::span<const std::uint8_t> target,
                                      std::span<const std::uint8_t> comparison);

}  // namespace tsexp
