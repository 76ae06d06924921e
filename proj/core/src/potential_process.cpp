#include "tsexp/potential_process.hpp"

#include <cmath>
#include <string>

#include "tsexp/errors.hpp"
#include "tsexp/rng.hpp"

namespace tsexp {

namespace {

constexpr std::size_t kMaxEnumerationBits = 20;

// Fill suffix values of a scratch path: times s0+1..t get (w_dag, arm, w).
void compose_suffix(std::vector<std::uint8_t>& path, std::size_t s0, std::uint64_t dag_bits,
                    std::size_t q, std::uint8_t arm, std::uint64_t post_bits, std::size_t p) {
  std::size_t i = s0;
  for (std::size_t k = 0; k < q; ++k) path[i++] = static_cast<std::uint8_t>((dag_bits >> k) & 1u);
  path[i++] = arm;
  for (std::size_t k = 0; k < p; ++k) path[i++] = static_cast<std::uint8_t>((post_bits >> k) & 1u);
}

}  // namespace

void check_spec(const PotentialProcessSpec& spec) {
  if (spec.sigma0 < 0.0 || spec.sigma1 < 0.0)
    throw ValidationError("process spec: sigma must be non-negative");
  for (double v : {spec.mu0, spec.mu1, spec.phi, spec.theta, spec.sigma0, spec.sigma1, spec.y0}) {
    if (!std::isfinite(v)) throw ValidationError("process spec: non-finite parameter");
  }
}

NoisePath draw_noise(const PotentialProcessSpec& spec, std::size_t length, std::uint64_t seed) {
  if (length == 0) throw ValidationError("draw_noise: length must be >= 1");
  Rng rng(seed);
  std::vector<double> eps(length);
  if (spec.noise == NoiseKind::kGaussianStandard) {
    for (double& e : eps) e = rng.next_gaussian();
  } else {
    for (double& e : eps) e = rng.next_cauchy();
  }
  return NoisePath{std::move(eps), seed};
}

std::vector<double> evaluate_path(const PotentialProcessSpec& spec, const NoisePath& noise,
                                  std::span<const std::uint8_t> w) {
  if (noise.length() < w.size())
    throw ValidationError("evaluate_path: noise shorter than treatment path");
  std::vector<double> y(w.size());
  if (spec.family == ProcessFamily::kAr1) {
    double prev = spec.y0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      prev = spec.mu(w[i]) + spec.phi * prev + spec.sigma(w[i]) * noise.epsilon[i];
      y[i] = prev;
    }
  } else {
    for (std::size_t i = 0; i < w.size(); ++i) {
      // Pre-sample noise term is zero: the lagged component starts at t = 2.
      const double lagged =
          i == 0 ? 0.0 : spec.theta * spec.sigma(w[i - 1]) * noise.epsilon[i - 1];
      y[i] = spec.mu(w[i]) + spec.sigma(w[i]) * noise.epsilon[i] + lagged;
    }
  }
  return y;
}

SimulatedExperiment simulate_process(const PotentialProcessSpec& spec,
                                     const AssignmentMechanism& mechanism, std::size_t length,
                                     std::uint64_t noise_seed, std::uint64_t path_seed) {
  check_spec(spec);
  NoisePath noise = draw_noise(spec, length, noise_seed);
  Rng path_rng(path_seed);

  std::vector<std::uint8_t> w;
  std::vector<double> probs;
  std::vector<double> y;
  w.reserve(length);
  probs.reserve(length);
  y.reserve(length);

  double prev = spec.y0;
  for (std::size_t t = 1; t <= length; ++t) {
    const double p1 = mechanism.prob_treated(w, y);
    probs.push_back(p1);
    const std::uint8_t wt = path_rng.next_bernoulli(p1) ? 1 : 0;
    w.push_back(wt);
    double yt;
    if (spec.family == ProcessFamily::kAr1) {
      yt = spec.mu(wt) + spec.phi * prev + spec.sigma(wt) * noise.at_time(t);
    } else {
      const double lagged =
          t == 1 ? 0.0 : spec.theta * spec.sigma(w[t - 2]) * noise.at_time(t - 1);
      yt = spec.mu(wt) + spec.sigma(wt) * noise.at_time(t) + lagged;
    }
    y.push_back(yt);
    prev = yt;
  }
  return SimulatedExperiment{std::move(y), TreatmentPath(std::move(w)), std::move(probs),
                             std::move(noise)};
}

std::vector<double> true_lag_effect(const PotentialProcessSpec& spec, const NoisePath& noise,
                                    const TreatmentPath& w_obs, std::size_t p) {
  const std::size_t T = w_obs.length();
  if (p >= T) throw ValidationError("true_lag_effect: p must be < T");
  if (noise.length() < T) throw ValidationError("true_lag_effect: noise shorter than path");
  const double dmu = spec.mu1 - spec.mu0;
  const double dsigma = spec.sigma1 - spec.sigma0;
  std::vector<double> tau;
  tau.reserve(T - p);
  if (spec.family == ProcessFamily::kAr1) {
    const double scale = std::pow(spec.phi, static_cast<double>(p));
    for (std::size_t t = p + 1; t <= T; ++t)
      tau.push_back(scale * (dmu + dsigma * noise.at_time(t - p)));
  } else {
    for (std::size_t t = p + 1; t <= T; ++t) {
      if (p == 0)
        tau.push_back(dmu + dsigma * noise.at_time(t));
      else if (p == 1)
        tau.push_back(spec.theta * dsigma * noise.at_time(t - 1));
      else
        tau.push_back(0.0);
    }
  }
  return tau;
}

std::vector<double> true_lag_effect_enumerated(const PotentialProcessSpec& spec,
                                               const NoisePath& noise, const TreatmentPath& w_obs,
                                               std::size_t p) {
  return true_step_effect(spec, noise, w_obs, p, 0);
}

std::vector<double> true_step_effect(const PotentialProcessSpec& spec, const NoisePath& noise,
                                     const TreatmentPath& w_obs, std::size_t p, std::size_t q,
                                     StepBoundary boundary) {
  const std::size_t T = w_obs.length();
  if (p >= T) throw ValidationError("true_step_effect: p must be < T");
  if (p + q > kMaxEnumerationBits)
    throw ValidationError("true_step_effect: 2^(p+q) enumeration capped at p+q <= " +
                          std::to_string(kMaxEnumerationBits));
  if (noise.length() < T) throw ValidationError("true_step_effect: noise shorter than path");

  std::vector<double> tau;
  tau.reserve(T - p);
  std::vector<std::uint8_t> scratch(w_obs.values().begin(), w_obs.values().end());

  for (std::size_t t = p + 1; t <= T; ++t) {
    const std::size_t feasible = t - p - 1;  // assignments available before the switch
    std::size_t q_eff = std::min(q, feasible);
    if (boundary == StepBoundary::kLiteralPlusOne && q > feasible) {
      // Literal exponent t-p+1; only t-p-1 pre-switch assignments exist and
      // earlier ones influence nothing, so the clamp changes no value.
      q_eff = std::min(t - p + 1, feasible);
    }
    const std::size_t s0 = t - p - q_eff - 1;  // observed prefix covers 1..s0
    const std::uint64_t n_dag = std::uint64_t{1} << q_eff;
    const std::uint64_t n_post = std::uint64_t{1} << p;
    const double weight = 1.0 / static_cast<double>(n_dag * n_post);

    std::span<const std::uint8_t> sub(scratch.data(), t);
    double acc = 0.0;
    for (std::uint64_t dag = 0; dag < n_dag; ++dag) {
      for (std::uint64_t post = 0; post < n_post; ++post) {
        compose_suffix(scratch, s0, dag, q_eff, 1, post, p);
        const double y_treat = evaluate_path(spec, noise, sub).back();
        compose_suffix(scratch, s0, dag, q_eff, 0, post, p);
        const double y_ctrl = evaluate_path(spec, noise, sub).back();
        acc += y_treat - y_ctrl;
      }
    }
    tau.push_back(weight * acc);
    // Restore observed values for the next t.
    for (std::size_t s = s0; s < t; ++s) scratch[s] = w_obs.values()[s];
  }
  return tau;
}

}  // namespace tsexp
