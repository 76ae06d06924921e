#include "tsexp/experiment.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "tsexp/errors.hpp"

namespace tsexp {

namespace {

constexpr double kProbConsistencyTol = 1e-12;

std::string format_prob(double p) {
  std::ostringstream os;
  os.precision(17);
  os << p;
  return os.str();
}

}  // namespace

UnitExperiment::UnitExperiment(std::string unit_id, std::vector<std::string> timestamps,
                               std::vector<double> outcomes, TreatmentPath treatments,
                               AssignmentMechanism mechanism, std::vector<double> prob_treated)
    : unit_id_(std::move(unit_id)),
      timestamps_(std::move(timestamps)),
      outcomes_(std::move(outcomes)),
      treatments_(std::move(treatments)),
      mechanism_(std::move(mechanism)),
      prob_treated_(std::move(prob_treated)) {
  const std::size_t n = outcomes_.size();
  if (n == 0) throw ValidationError("experiment: empty outcome series");
  if (treatments_.length() != n)
    throw ValidationError("experiment: treatments length " + std::to_string(treatments_.length()) +
                          " != outcomes length " + std::to_string(n));
  if (!prob_treated_.empty() && prob_treated_.size() != n)
    throw ValidationError("experiment: probability series length mismatch");
  if (timestamps_.empty()) {
    timestamps_.reserve(n);
    for (std::size_t t = 1; t <= n; ++t) timestamps_.push_back(std::to_string(t));
  }
  if (timestamps_.size() != n) throw ValidationError("experiment: timestamp column length mismatch");

  if (prob_treated_.empty()) {
    prob_treated_.reserve(n);
    for (std::size_t t = 1; t <= n; ++t) {
      prob_treated_.push_back(
          mechanism_.prob_treated(treatments_.prefix(t - 1),
                                  std::span<const double>(outcomes_.data(), t - 1)));
    }
  }
}

double UnitExperiment::observed_suffix_propensity(std::size_t t, std::size_t len) const {
  if (len == 0 || t < len || t > length())
    throw ValidationError("suffix propensity: bad (t, len)");
  double prob = 1.0;
  for (std::size_t s = t - len + 1; s <= t; ++s) {
    const double p1 = prob_treated_[s - 1];
    prob *= treatments_.at_time(s) ? p1 : 1.0 - p1;
  }
  return prob;
}

double UnitExperiment::counterfactual_suffix_propensity(
    std::size_t t, std::span<const std::uint8_t> suffix) const {
  if (suffix.empty() || t < suffix.size() || t > length())
    throw ValidationError("suffix propensity: bad (t, suffix)");
  const std::size_t s0 = t - suffix.size();  // prefix covers 1..s0
  return path_propensity(mechanism_, treatments_.prefix(s0), outcomes_, suffix);
}

std::vector<Violation> validate_columns(std::span<const double> outcomes,
                                        std::span<const std::uint8_t> treatments,
                                        std::span<const double> prob_treated) {
  std::vector<Violation> out;
  if (outcomes.empty()) out.push_back({std::nullopt, "non-empty", "outcome series is empty"});
  if (treatments.size() != outcomes.size())
    out.push_back({std::nullopt, "equal-lengths",
                   "treatments length " + std::to_string(treatments.size()) +
                       " != outcomes length " + std::to_string(outcomes.size())});
  if (!prob_treated.empty() && prob_treated.size() != outcomes.size())
    out.push_back({std::nullopt, "equal-lengths",
                   "probability series length " + std::to_string(prob_treated.size()) +
                       " != outcomes length " + std::to_string(outcomes.size())});
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!std::isfinite(outcomes[i]))
      out.push_back({i + 1, "finite-outcomes", "non-finite outcome"});
  }
  for (std::size_t i = 0; i < treatments.size(); ++i) {
    if (treatments[i] > 1) out.push_back({i + 1, "binary-treatments", "treatment not in {0,1}"});
  }
  for (std::size_t i = 0; i < prob_treated.size(); ++i) {
    if (!probability_in_interior(prob_treated[i]))
      out.push_back({i + 1, "probabilistic-assignment",
                     "p_t(1) = " + format_prob(prob_treated[i]) +
                         " not strictly inside (0,1)"});
  }
  return out;
}

std::vector<Violation> validate_experiment(const UnitExperiment& e) {
  std::vector<Violation> out =
      validate_columns(e.outcomes(), e.treatments().values(), e.prob_treated());

  // Mechanism must reproduce the stored probabilities along the observed
  // history (non-anticipation is structural: the mechanism only ever sees
  // data before t).
  for (std::size_t t = 1; t <= e.length(); ++t) {
    double p = 0.0;
    try {
      p = e.mechanism().prob_treated(e.treatments().prefix(t - 1),
                                     std::span<const double>(e.outcomes().data(), t - 1));
    } catch (const ValidationError& err) {
      out.push_back({t, "probabilistic-assignment", err.what()});
      continue;
    }
    if (std::abs(p - e.prob_treated()[t - 1]) > kProbConsistencyTol)
      out.push_back({t, "mechanism-consistency",
                     "stored p_t(1) = " + format_prob(e.prob_treated()[t - 1]) +
                         " but mechanism gives " + format_prob(p)});
  }
  return out;
}

Panel::Panel(std::vector<UnitExperiment> units, bool independent_assignment)
    : units_(std::move(units)), independent_assignment_(independent_assignment) {
  if (units_.empty()) throw ValidationError("panel: needs at least one unit");
  std::set<std::string> ids;
  for (const auto& u : units_) {
    if (!ids.insert(u.unit_id()).second)
      throw ValidationError("panel: duplicate unit_id '" + u.unit_id() + "'");
  }
}

}  // namespace tsexp
