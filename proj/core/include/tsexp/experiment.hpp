#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsexp/assignment.hpp"
#include "tsexp/treatment_path.hpp"

namespace tsexp {

// One unit's observed series: times 1..T, outcomes y_t, treatments w_t and
// the realized assignment probabilities p_t(1). Immutable after construction
// and safe to share across threads.
class UnitExperiment {
 public:
  // prob_treated may be empty, in which case it is reconstructed from the
  // mechanism along the observed history.
  UnitExperiment(std::string unit_id, std::vector<std::string> timestamps,
                 std::vector<double> outcomes, TreatmentPath treatments,
                 AssignmentMechanism mechanism, std::vector<double> prob_treated = {});

  const std::string& unit_id() const noexcept { return unit_id_; }
  std::size_t length() const noexcept { return outcomes_.size(); }
  const std::vector<std::string>& timestamps() const noexcept { return timestamps_; }
  std::span<const double> outcomes() const noexcept { return outcomes_; }
  const TreatmentPath& treatments() const noexcept { return treatments_; }
  const AssignmentMechanism& mechanism() const noexcept { return mechanism_; }

  // Realized p_t(1) along the observed history.
  std::span<const double> prob_treated() const noexcept { return prob_treated_; }

  double outcome_at(std::size_t t) const { return outcomes_.at(t - 1); }
  std::uint8_t treatment_at(std::size_t t) const { return treatments_.at_time(t); }

  // Probability of the observed suffix w_{t-len+1:t}, the product of the
  // realized one-step probabilities. Exact for any mechanism because it is
  // evaluated along the path that actually occurred.
  double observed_suffix_propensity(std::size_t t, std::size_t len) const;

  // Probability of an arbitrary suffix at times t-len+1..t given the observed
  // history before it. For history-dependent mechanisms this feeds the rule
  // the observed outcomes, which is exact under the sharp null.
  double counterfactual_suffix_propensity(std::size_t t,
                                          std::span<const std::uint8_t> suffix) const;

 private:
  std::string unit_id_;
  std::vector<std::string> timestamps_;
  std::vector<double> outcomes_;
  TreatmentPath treatments_;
  AssignmentMechanism mechanism_;
  std::vector<double> prob_treated_;
};

struct Violation {
  std::optional<std::size_t> time;  // 1-based index when the violation is local
  std::string rule;                 // which requirement failed
  std::string detail;
};

// Structural checks: equal lengths, finite outcomes, binary treatments,
// probabilities strictly inside (0,1), stored probabilities consistent with
// the mechanism to 1e-12. Violations are returned as data, not thrown.
std::vector<Violation> validate_experiment(const UnitExperiment& e);

// Convenience used by file loaders: raw columns, validated the same way but
// before a UnitExperiment can be constructed.
std::vector<Violation> validate_columns(std::span<const double> outcomes,
                                        std::span<const std::uint8_t> treatments,
                                        std::span<const double> prob_treated);

class Panel {
 public:
  // independent_assignment asserts that units' treatment paths are assigned
  // independently of one another (required by the pooled reference
  // distributions and Fisher combination).
  explicit Panel(std::vector<UnitExperiment> units, bool independent_assignment = true);

  std::span<const UnitExperiment> units() const noexcept { return units_; }
  std::size_t size() const noexcept { return units_.size(); }
  bool independent_assignment() const noexcept { return independent_assignment_; }

 private:
  std::vector<UnitExperiment> units_;
  bool independent_assignment_;
};

}  // namespace tsexp
