#include "tsexp/assignment.hpp"

#include <algorithm>
#include <sstream>

#include "tsexp/errors.hpp"
#include "tsexp/rng.hpp"

namespace tsexp {

namespace {

void require_interior(double p, const char* who) {
  if (!probability_in_interior(p)) {
    std::ostringstream os;
    os << who << ": assignment probability " << p << " outside the open unit interval";
    throw ValidationError(os.str());
  }
}

}  // namespace

AssignmentMechanism AssignmentMechanism::bernoulli(double prob_treated) {
  require_interior(prob_treated, "bernoulli mechanism");
  AssignmentMechanism m;
  m.kind_ = Kind::kBernoulliConstant;
  m.constant_prob_ = prob_treated;
  return m;
}

AssignmentMechanism AssignmentMechanism::bernoulli_piecewise(
    std::vector<ProbabilityBreakpoint> breakpoints) {
  if (breakpoints.empty())
    throw ValidationError("piecewise mechanism: need at least one breakpoint");
  std::stable_sort(breakpoints.begin(), breakpoints.end(),
                   [](const auto& a, const auto& b) { return a.start_time < b.start_time; });
  if (breakpoints.front().start_time > 1)
    throw ValidationError("piecewise mechanism: first breakpoint must start at time 1 or earlier");
  for (const auto& bp : breakpoints) require_interior(bp.prob_treated, "piecewise mechanism");
  AssignmentMechanism m;
  m.kind_ = Kind::kBernoulliPiecewise;
  m.breakpoints_ = std::move(breakpoints);
  return m;
}

AssignmentMechanism AssignmentMechanism::history_dependent(HistoryRule rule) {
  if (!rule) throw ValidationError("history mechanism: empty rule");
  AssignmentMechanism m;
  m.kind_ = Kind::kHistoryDependent;
  m.rule_ = std::move(rule);
  return m;
}

AssignmentMechanism AssignmentMechanism::from_probability_series(
    std::span<const double> prob_treated) {
  if (prob_treated.empty()) throw ValidationError("probability series: empty");
  std::vector<ProbabilityBreakpoint> bps;
  bps.reserve(prob_treated.size());
  for (std::size_t i = 0; i < prob_treated.size(); ++i)
    bps.push_back({static_cast<std::int64_t>(i) + 1, prob_treated[i]});
  return bernoulli_piecewise(std::move(bps));
}

double AssignmentMechanism::prob_treated(std::span<const std::uint8_t> w_history,
                                         std::span<const double> y_history) const {
  switch (kind_) {
    case Kind::kBernoulliConstant:
      return constant_prob_;
    case Kind::kBernoulliPiecewise: {
      const std::int64_t t = static_cast<std::int64_t>(w_history.size()) + 1;
      double p = breakpoints_.front().prob_treated;
      for (const auto& bp : breakpoints_) {
        if (bp.start_time <= t) p = bp.prob_treated;
        else break;
      }
      return p;
    }
    case Kind::kHistoryDependent: {
      const double p = rule_(w_history, y_history);
      require_interior(p, "history mechanism rule");
      return p;
    }
  }
  throw ValidationError("mechanism: unknown kind");
}

std::string AssignmentMechanism::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::kBernoulliConstant:
      os << "bernoulli-constant(pi=" << constant_prob_ << ")";
      break;
    case Kind::kBernoulliPiecewise:
      os << "bernoulli-piecewise(" << breakpoints_.size() << " breakpoints)";
      break;
    case Kind::kHistoryDependent:
      os << "history-dependent";
      break;
  }
  return os.str();
}

double path_propensity(const AssignmentMechanism& mechanism,
                       std::span<const std::uint8_t> w_prefix, std::span<const double> y_obs,
                       std::span<const std::uint8_t> w_suffix) {
  if (w_suffix.empty()) throw ValidationError("path_propensity: empty suffix");
  const std::size_t t_last = w_prefix.size() + w_suffix.size();
  if (mechanism.kind() == AssignmentMechanism::Kind::kHistoryDependent &&
      y_obs.size() + 1 < t_last)
    throw ValidationError("path_propensity: outcome history too short for history rule");

  // Walk the suffix, extending the treatment history one step at a time.
  std::vector<std::uint8_t> w(w_prefix.begin(), w_prefix.end());
  w.reserve(t_last);
  double prob = 1.0;
  for (std::uint8_t ws : w_suffix) {
    const std::size_t y_len = std::min(y_obs.size(), w.size());
    const double p1 = mechanism.prob_treated(w, y_obs.subspan(0, y_len));
    prob *= ws ? p1 : 1.0 - p1;
    w.push_back(ws);
  }
  return prob;
}

SampledPath sample_path(const AssignmentMechanism& mechanism, std::span<const double> y_obs,
                        std::size_t length, std::uint64_t seed) {
  if (length == 0) throw ValidationError("sample_path: length must be >= 1");
  Rng rng(seed);
  std::vector<std::uint8_t> w;
  std::vector<double> probs;
  w.reserve(length);
  probs.reserve(length);
  for (std::size_t t = 1; t <= length; ++t) {
    const std::size_t y_len = std::min(y_obs.size(), w.size());
    const double p1 = mechanism.prob_treated(w, y_obs.subspan(0, y_len));
    probs.push_back(p1);
    w.push_back(rng.next_bernoulli(p1) ? 1 : 0);
  }
  return SampledPath{TreatmentPath(std::move(w)), std::move(probs)};
}

}  // namespace tsexp
