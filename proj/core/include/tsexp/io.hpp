#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsexp/estimators.hpp"
#include "tsexp/experiment.hpp"
#include "tsexp/inference.hpp"
#include "tsexp/pooling.hpp"
#include "tsexp/potential_process.hpp"
#include "tsexp/slippage.hpp"

namespace tsexp {

// ---------------------------------------------------------------------------
// Experiment CSV: columns t, ts, y, w, p1 (exact, case-sensitive headers),
// plus unit_id for multi-unit files. Rows are sorted by t and relabeled
// 1..T, so calendar-style t labels are accepted.
// ---------------------------------------------------------------------------

struct ExperimentRows {
  std::string unit_id;
  std::vector<std::string> ts;
  std::vector<double> y;
  std::vector<std::uint8_t> w;
  std::vector<double> p1;
};

// One entry per unit (single "" unit when the file has no unit_id column).
std::vector<ExperimentRows> read_experiment_rows(const std::string& path);

// Build the experiment; without an explicit mechanism the stored p1 column is
// taken as given (time-varying Bernoulli).
UnitExperiment rows_to_experiment(const ExperimentRows& rows,
                                  const std::optional<AssignmentMechanism>& mechanism = {});

void write_experiment_csv(const std::string& path, const UnitExperiment& e);
void write_panel_csv(const std::string& path, const Panel& panel);

// ---------------------------------------------------------------------------
// Orders CSV: columns order_id, ts, side, mid_price, method, trade_ts,
// trade_price, volume_fraction; one row per trade, grouped by order_id.
// ---------------------------------------------------------------------------

std::vector<OrderRecord> read_orders_csv(const std::string& path);

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

PotentialProcessSpec process_spec_from_json_text(const std::string& text);
std::string process_spec_to_json_text(const PotentialProcessSpec& spec);

// Assignment mechanism described in a file; breakpoints may be given by
// 1-based index ("start") or by timestamp ("start_ts"), the latter resolved
// against the experiment's own timestamps.
struct MechanismConfig {
  std::string kind;  // "bernoulli-constant" | "bernoulli-piecewise"
  double pi = 0.5;
  struct Breakpoint {
    std::optional<std::int64_t> start;       // 1-based time index
    std::optional<std::string> start_ts;     // timestamp, resolved per dataset
    double pi = 0.5;
  };
  std::vector<Breakpoint> breakpoints;
};

MechanismConfig mechanism_config_from_json_text(const std::string& text);

// Turn a config into a concrete mechanism. Timestamp breakpoints need the
// (sorted) per-observation timestamps to find the first affected index.
AssignmentMechanism resolve_mechanism(const MechanismConfig& config,
                                      const std::vector<std::string>& timestamps = {});

std::string estimate_result_to_json_text(const EstimateResult& r);
std::string test_result_to_json_text(const TestResult& r);
std::string pooled_result_to_json_text(const PooledResult& r);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string format_violations(const std::vector<Violation>& violations);

}  // namespace tsexp
