#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tsexp/treatment_path.hpp"

namespace tsexp {

// Assignment probabilities must stay strictly inside (0,1); the margin keeps
// inverse-probability weights finite.
inline constexpr double kMinAssignProb = 1e-12;

inline constexpr bool probability_in_interior(double p) noexcept {
  return p >= kMinAssignProb && p <= 1.0 - kMinAssignProb;
}

struct ProbabilityBreakpoint {
  std::int64_t start_time = 1;  // 1-based time at which this probability takes effect
  double prob_treated = 0.5;
};

// How the next assignment is drawn given the past. Three kinds:
//   - bernoulli-constant:   p_t(1) = pi for all t
//   - bernoulli-piecewise:  p_t(1) is a step function of t
//   - history-dependent:    p_t(1) = rule(w_{1:t-1}, y_{1:t-1})
// The rule sees only data strictly before t, so the mechanism is
// non-anticipating by construction. When a history-dependent rule is
// evaluated along counterfactual treatment paths it is fed the observed
// outcomes; for non-Bernoulli rules that is valid only under the sharp null
// (the resampling algorithm does exactly this).
class AssignmentMechanism {
 public:
  enum class Kind { kBernoulliConstant, kBernoulliPiecewise, kHistoryDependent };

  using HistoryRule = std::function<double(std::span<const std::uint8_t> w_history,
                                           std::span<const double> y_history)>;

  static AssignmentMechanism bernoulli(double prob_treated);
  static AssignmentMechanism bernoulli_piecewise(std::vector<ProbabilityBreakpoint> breakpoints);
  static AssignmentMechanism history_dependent(HistoryRule rule);
  // Time-varying Bernoulli taking the stored probability column as given
  // (one breakpoint per time step). This is how experiments loaded from CSV
  // without an explicit mechanism are resampled.
  static AssignmentMechanism from_probability_series(std::span<const double> prob_treated);

  Kind kind() const noexcept { return kind_; }

  // True when p_t(1) does not depend on past treatments or outcomes, so
  // counterfactual path probabilities are exact (no sharp-null caveat).
  bool history_free() const noexcept { return kind_ != Kind::kHistoryDependent; }

  // p_t(1) where t = w_history.size() + 1. Throws ValidationError if a
  // history rule emits a probability outside the open unit interval.
  double prob_treated(std::span<const std::uint8_t> w_history,
                      std::span<const double> y_history) const;

  std::string describe() const;

 private:
  AssignmentMechanism() = default;

  Kind kind_ = Kind::kBernoulliConstant;
  double constant_prob_ = 0.5;
  std::vector<ProbabilityBreakpoint> breakpoints_;
  HistoryRule rule_;
};

// Adapted path propensity: the probability that W_{s:t} equals w_suffix given
// the history before s, where s = w_prefix.size() + 1 and t = s +
// w_suffix.size() - 1. Computed as the product of the sequential one-step
// probabilities. y_obs must cover at least times 1..t-1 for history rules.
double path_propensity(const AssignmentMechanism& mechanism,
                       std::span<const std::uint8_t> w_prefix,
                       std::span<const double> y_obs,
                       std::span<const std::uint8_t> w_suffix);

struct SampledPath {
  TreatmentPath treatments;
  std::vector<double> prob_treated;  // realized p_t(1) along the sampled path
};

// Draw w_1..w_T sequentially; history rules are fed y_obs. Deterministic in
// (mechanism, y_obs, length, seed).
SampledPath sample_path(const AssignmentMechanism& mechanism, std::span<const double> y_obs,
                        std::size_t length, std::uint64_t seed);

}  // namespace tsexp
