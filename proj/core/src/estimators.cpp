#include "tsexp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsexp/errors.hpp"

namespace tsexp {

namespace {

constexpr std::size_t kMaxSuffixBits = 20;

std::size_t effective_steps(std::size_t t, std::size_t p, std::size_t q) {
  return std::min(q, t - p - 1);
}

void check_lag_range(std::size_t T, std::size_t p, std::size_t q) {
  if (p + q >= T)
    throw ValidationError("estimator: p + q = " + std::to_string(p + q) +
                          " must be < T = " + std::to_string(T));
  if (p + q > kMaxSuffixBits)
    throw ValidationError("estimator: p + q capped at " + std::to_string(kMaxSuffixBits));
}

// Product of one-step probabilities of the observed suffix w_{t-len+1:t}.
double observed_propensity(std::span<const std::uint8_t> w, std::span<const double> probs,
                           std::size_t t, std::size_t len) {
  double pi = 1.0;
  for (std::size_t s = t - len + 1; s <= t; ++s) {
    const double p1 = probs[s - 1];
    pi *= w[s - 1] ? p1 : 1.0 - p1;
  }
  if (!(pi > 0.0 && pi < 1.0))
    throw ValidationError("estimator: path propensity outside (0,1) at t = " + std::to_string(t));
  return pi;
}

double point_estimate_impl(std::span<const std::uint8_t> w, std::span<const double> probs,
                           std::size_t t, std::size_t p, std::size_t q_eff, double numerator) {
  const double a = std::ldexp(1.0, -static_cast<int>(p + q_eff));
  const double pi = observed_propensity(w, probs, t, p + q_eff + 1);
  const double sign = w[t - p - 1] ? 1.0 : -1.0;
  return a * numerator * sign / pi;
}

}  // namespace

double ht_point_estimate(std::span<const double> y, std::span<const std::uint8_t> w,
                         std::span<const double> prob_treated, std::size_t t, std::size_t p,
                         std::size_t q) {
  const std::size_t q_eff = effective_steps(t, p, q);
  return point_estimate_impl(w, prob_treated, t, p, q_eff, y[t - 1]);
}

double ht_variance_bound_at(std::span<const double> y, std::span<const std::uint8_t> w,
                            std::span<const double> prob_treated, std::size_t t, std::size_t p,
                            std::size_t q) {
  const std::size_t q_eff = effective_steps(t, p, q);
  const double a = std::ldexp(1.0, -static_cast<int>(p + q_eff));
  const double pi = observed_propensity(w, prob_treated, t, p + q_eff + 1);
  const double paths_minus_one = std::ldexp(1.0, static_cast<int>(p + q_eff)) - 1.0;
  const double y2 = y[t - 1] * y[t - 1];
  return a * a * y2 * (1.0 + 2.0 * pi * paths_minus_one) / (pi * pi);
}

double ht_series_average(std::span<const double> y, std::span<const std::uint8_t> w,
                         std::span<const double> prob_treated, std::size_t p, std::size_t q) {
  const std::size_t T = y.size();
  double acc = 0.0;
  for (std::size_t t = p + 1; t <= T; ++t)
    acc += ht_point_estimate(y, w, prob_treated, t, p, q);
  return acc / static_cast<double>(T - p);
}

std::vector<double> ht_lag_estimate(const UnitExperiment& e, std::size_t p) {
  return ht_step_estimate(e, p, 0);
}

std::vector<double> ht_step_estimate(const UnitExperiment& e, std::size_t p, std::size_t q) {
  check_lag_range(e.length(), p, q);
  std::vector<double> out;
  out.reserve(e.length() - p);
  for (std::size_t t = p + 1; t <= e.length(); ++t)
    out.push_back(
        ht_point_estimate(e.outcomes(), e.treatments().values(), e.prob_treated(), t, p, q));
  return out;
}

std::vector<double> variance_bound(const UnitExperiment& e, std::size_t p, std::size_t q) {
  check_lag_range(e.length(), p, q);
  std::vector<double> out;
  out.reserve(e.length() - p);
  for (std::size_t t = p + 1; t <= e.length(); ++t)
    out.push_back(
        ht_variance_bound_at(e.outcomes(), e.treatments().values(), e.prob_treated(), t, p, q));
  return out;
}

EstimateResult average_estimate(const EstimandSpec& estimand, std::span<const double> per_t,
                                std::span<const double> bounds, std::size_t t_start) {
  if (per_t.empty()) throw ValidationError("average_estimate: empty series");
  if (bounds.size() != per_t.size())
    throw ValidationError("average_estimate: bounds/series length mismatch");
  EstimateResult r;
  r.estimand = estimand;
  r.t_effective = per_t.size();
  r.per_t.reserve(per_t.size());
  double sum_tau = 0.0;
  double sum_bound = 0.0;
  for (std::size_t i = 0; i < per_t.size(); ++i) {
    r.per_t.push_back({t_start + i, per_t[i], bounds[i]});
    sum_tau += per_t[i];
    sum_bound += bounds[i];
  }
  const double n = static_cast<double>(per_t.size());
  r.tau_bar_hat = sum_tau / n;
  r.gamma_hat = sum_bound / (n * n);
  return r;
}

EstimateResult estimate(const UnitExperiment& e, const EstimandSpec& estimand) {
  if (estimand.m_period.has_value()) {
    const auto& c = *estimand.m_period;
    if (c.target.size() != c.comparison.size() || c.target.empty())
      throw ValidationError("estimate: m-period suffixes must share length m+1");
    const std::size_t m = c.target.size() - 1;
    auto series = m_period_estimate(e, m, c.target, c.comparison);
    // No variance-bound theory is attached to the m-period contrast; the
    // aggregate carries zero bounds.
    std::vector<double> zeros(series.size(), 0.0);
    return average_estimate(estimand, series, zeros, m + 1);
  }
  if (estimand.use_proxy) {
    check_lag_range(e.length(), estimand.p, estimand.q);
    const auto z = proxy_numerators(e, estimand.p, ProxyRule::lagged_outcome());
    const auto w = e.treatments().values();
    std::vector<double> series, bounds;
    for (std::size_t t = estimand.p + 1; t <= e.length(); ++t) {
      series.push_back(ht_point_estimate(z, w, e.prob_treated(), t, estimand.p, estimand.q));
      bounds.push_back(ht_variance_bound_at(z, w, e.prob_treated(), t, estimand.p, estimand.q));
    }
    return average_estimate(estimand, series, bounds, estimand.p + 1);
  }
  auto series = ht_step_estimate(e, estimand.p, estimand.q);
  auto bounds = variance_bound(e, estimand.p, estimand.q);
  return average_estimate(estimand, series, bounds, estimand.p + 1);
}

ProxyRule ProxyRule::zero() {
  return ProxyRule([](std::span<const double>, std::span<const std::uint8_t>) { return 0.0; });
}

ProxyRule ProxyRule::lagged_outcome() {
  return ProxyRule([](std::span<const double> y_hist, std::span<const std::uint8_t>) {
    return y_hist.empty() ? 0.0 : y_hist.back();
  });
}

ProxyRule ProxyRule::custom(Fn fn) {
  if (!fn) throw ValidationError("proxy rule: empty function");
  return ProxyRule(std::move(fn));
}

double ProxyRule::predict(std::span<const double> y_history,
                          std::span<const std::uint8_t> w_history) const {
  const double v = fn_(y_history, w_history);
  if (!std::isfinite(v)) throw ValidationError("proxy rule: non-finite prediction");
  return v;
}

std::vector<double> proxy_adjusted_estimate(const UnitExperiment& e, std::size_t p,
                                            const ProxyRule& proxy) {
  check_lag_range(e.length(), p, 0);
  const auto y = e.outcomes();
  const auto w = e.treatments().values();
  std::vector<double> out;
  out.reserve(e.length() - p);
  for (std::size_t t = p + 1; t <= e.length(); ++t) {
    // The rule sees exactly the slice up to t-p-1, never later data.
    const std::size_t hist = t - p - 1;
    const double mu_tilde =
        proxy.predict(y.subspan(0, hist), e.treatments().prefix(hist));
    const double adjusted = y[t - 1] - mu_tilde;
    out.push_back(point_estimate_impl(w, e.prob_treated(), t, p, 0, adjusted));
  }
  return out;
}

std::vector<double> proxy_numerators(const UnitExperiment& e, std::size_t p,
                                     const ProxyRule& proxy) {
  check_lag_range(e.length(), p, 0);
  const auto y = e.outcomes();
  std::vector<double> z(y.begin(), y.end());
  for (std::size_t t = p + 1; t <= e.length(); ++t) {
    const std::size_t hist = t - p - 1;
    z[t - 1] = y[t - 1] - proxy.predict(y.subspan(0, hist), e.treatments().prefix(hist));
  }
  return z;
}

double sharp_null_variance_at(const UnitExperiment& e, std::size_t t, std::size_t p,
                              std::size_t q) {
  check_lag_range(e.length(), p, q);
  if (t < p + 1 || t > e.length()) throw ValidationError("sharp_null_variance_at: t out of range");
  const std::size_t q_eff = effective_steps(t, p, q);
  const std::size_t k = p + q_eff;  // enumerated assignments besides the switch
  const double y = e.outcome_at(t);
  if (y == 0.0) return 0.0;

  std::vector<std::uint8_t> suffix(k + 1);
  double sum = 0.0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k); ++bits) {
    // Layout over times t-k..t: q_eff stepped assignments, the switch, then
    // the p trailing ones.
    for (std::size_t j = 0; j < q_eff; ++j)
      suffix[j] = static_cast<std::uint8_t>((bits >> j) & 1u);
    for (std::size_t j = 0; j < p; ++j)
      suffix[q_eff + 1 + j] = static_cast<std::uint8_t>((bits >> (q_eff + j)) & 1u);
    for (std::uint8_t arm : {std::uint8_t{1}, std::uint8_t{0}}) {
      suffix[q_eff] = arm;
      sum += 1.0 / e.counterfactual_suffix_propensity(t, suffix);
    }
  }
  const double a = std::ldexp(1.0, -static_cast<int>(k));
  return y * y * a * a * sum;
}

std::vector<double> standardized_estimate(const UnitExperiment& e, std::size_t p) {
  check_lag_range(e.length(), p, 0);
  std::vector<double> out;
  out.reserve(e.length() - p);
  for (std::size_t t = p + 1; t <= e.length(); ++t) {
    if (e.outcome_at(t) == 0.0) {
      out.push_back(0.0);
      continue;
    }
    const double tau = ht_point_estimate(e.outcomes(), e.treatments().values(), e.prob_treated(),
                                         t, p, 0);
    out.push_back(tau / std::sqrt(sharp_null_variance_at(e, t, p, 0)));
  }
  return out;
}

std::vector<double> m_period_estimate(const UnitExperiment& e, std::size_t m,
                                      std::span<const std::uint8_t> target,
                                      std::span<const std::uint8_t> comparison) {
  if (target.size() != m + 1 || comparison.size() != m + 1)
    throw ValidationError("m_period_estimate: suffixes must have length m+1");
  if (std::equal(target.begin(), target.end(), comparison.begin()))
    throw ValidationError("m_period_estimate: target and comparison must differ");
  if (m + 1 > e.length()) throw ValidationError("m_period_estimate: m + 1 must be <= T");

  const auto w = e.treatments().values();
  std::vector<double> out;
  out.reserve(e.length() - m);
  for (std::size_t t = m + 1; t <= e.length(); ++t) {
    const auto observed = w.subspan(t - m - 1, m + 1);
    double value = 0.0;
    if (std::equal(observed.begin(), observed.end(), target.begin()))
      value = e.outcome_at(t) / e.observed_suffix_propensity(t, m + 1);
    else if (std::equal(observed.begin(), observed.end(), comparison.begin()))
      value = -e.outcome_at(t) / e.observed_suffix_propensity(t, m + 1);
    out.push_back(value);
  }
  return out;
}

}  // namespace tsexp
