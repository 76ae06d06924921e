#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsexp/assignment.hpp"
#include "tsexp/treatment_path.hpp"

namespace tsexp {

enum class ProcessFamily { kAr1, kMa1 };
enum class NoiseKind { kGaussianStandard, kCauchyStandard };

// Parameters of a coupled potential process. Drift and scale depend on the
// current assignment only (mu0/mu1, sigma0/sigma1); one persistence
// coefficient per family. The "impulse" variants are reparameterizations:
// mu_arm = mu + sigma * impulse_arm with equal sigmas.
//
// sigma = 0 is accepted so tests can run the recursion noiselessly; inference
// on such data is meaningless and the CLI refuses to simulate it.
struct PotentialProcessSpec {
  ProcessFamily family = ProcessFamily::kAr1;
  double mu0 = 0.0;
  double mu1 = 0.0;
  double phi = 0.0;    // ar1 persistence
  double theta = 0.0;  // ma1 lag coefficient
  double sigma0 = 1.0;
  double sigma1 = 1.0;
  NoiseKind noise = NoiseKind::kGaussianStandard;
  double y0 = 0.0;  // value of Y_0 for the ar1 recursion; unused by ma1

  double mu(std::uint8_t w) const noexcept { return w ? mu1 : mu0; }
  double sigma(std::uint8_t w) const noexcept { return w ? sigma1 : sigma0; }
};

// Throws ValidationError if scales are negative or parameters non-finite.
void check_spec(const PotentialProcessSpec& spec);

// One realization of the treatment-invariant noise that couples every
// counterfactual path.
struct NoisePath {
  std::vector<double> epsilon;
  std::uint64_t seed = 0;

  std::size_t length() const noexcept { return epsilon.size(); }
  // epsilon_t for 1-based t.
  double at_time(std::size_t t) const { return epsilon.at(t - 1); }
};

NoisePath draw_noise(const PotentialProcessSpec& spec, std::size_t length, std::uint64_t seed);

// Y_{1:T}(w) along one treatment path, sharing the given noise. Only the
// requested path is ever materialized.
std::vector<double> evaluate_path(const PotentialProcessSpec& spec, const NoisePath& noise,
                                  std::span<const std::uint8_t> w);

inline std::vector<double> evaluate_path(const PotentialProcessSpec& spec, const NoisePath& noise,
                                         const TreatmentPath& w) {
  return evaluate_path(spec, noise, w.values());
}

struct SimulatedExperiment {
  std::vector<double> outcomes;
  TreatmentPath treatments;
  std::vector<double> prob_treated;
  NoisePath noise;
};

// Draw one experiment: the coupling noise comes from noise_seed, then
// assignments and outcomes co-evolve step by step, so history-dependent
// mechanisms see the outcomes they would actually have observed.
SimulatedExperiment simulate_process(const PotentialProcessSpec& spec,
                                     const AssignmentMechanism& mechanism, std::size_t length,
                                     std::uint64_t noise_seed, std::uint64_t path_seed);

// How the infeasible boundary exponent of the stepped effect is resolved for
// t <= p + q. Both readings clamp to the t-p-1 assignments that actually
// exist before the switch (assignments before time 1 enter no potential
// outcome), so they evaluate identically; the literal variant exists to make
// that explicit.
enum class StepBoundary { kTruncate, kLiteralPlusOne };

// p-lag causal effect series tau_{t,p} for t = p+1..T, closed form:
//   ar1: phi^p * {(mu1-mu0) + (sigma1-sigma0) * eps_{t-p}}
//   ma1: p=0 gives (mu1-mu0)+(sigma1-sigma0)*eps_t, p=1 gives
//        theta*(sigma1-sigma0)*eps_{t-1}, higher lags vanish.
// Valid because drift and scale depend on the current assignment only.
std::vector<double> true_lag_effect(const PotentialProcessSpec& spec, const NoisePath& noise,
                                    const TreatmentPath& w_obs, std::size_t p);

// Same estimand evaluated from the definition: uniform average over the 2^p
// post-switch assignments, differencing evaluate_path calls. Independent
// route used to check the closed form.
std::vector<double> true_lag_effect_enumerated(const PotentialProcessSpec& spec,
                                               const NoisePath& noise, const TreatmentPath& w_obs,
                                               std::size_t p);

// q-step p-lag causal effect series for t = p+1..T, by enumeration over the
// q pre-switch and p post-switch assignments (2^{p+q} paths, capped at
// p + q <= 20). For t <= p+q the boundary rule reduces the step count.
std::vector<double> true_step_effect(const PotentialProcessSpec& spec, const NoisePath& noise,
                                     const TreatmentPath& w_obs, std::size_t p, std::size_t q,
                                     StepBoundary boundary = StepBoundary::kTruncate);

}  // namespace tsexp
