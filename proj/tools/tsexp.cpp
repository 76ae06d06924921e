#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "replicate.hpp"
#include "tsexp/errors.hpp"
#include "tsexp/estimators.hpp"
#include "tsexp/inference.hpp"
#include "tsexp/io.hpp"
#include "tsexp/pooling.hpp"
#include "tsexp/potential_process.hpp"
#include "tsexp/rng.hpp"

namespace fs = std::filesystem;
using namespace tsexp;

namespace {

unsigned resolve_threads(unsigned threads) {
  if (threads != 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::optional<AssignmentMechanism> load_mechanism(const std::string& mechanism_path,
                                                  const std::vector<std::string>& timestamps) {
  if (mechanism_path.empty()) return std::nullopt;
  const auto cfg = mechanism_config_from_json_text(read_text_file(mechanism_path));
  return resolve_mechanism(cfg, timestamps);
}

// Load, validate, and construct one experiment per unit; validation failures
// abort with the full report.
std::vector<UnitExperiment> load_units(const std::string& input,
                                       const std::string& mechanism_path) {
  const auto all_rows = read_experiment_rows(input);
  std::vector<UnitExperiment> units;
  for (const auto& rows : all_rows) {
    auto violations = validate_columns(rows.y, rows.w, rows.p1);
    if (!violations.empty())
      throw ValidationError(input + (rows.unit_id.empty() ? "" : " unit '" + rows.unit_id + "'") +
                            ":\n" + format_violations(violations));
    const auto mechanism = load_mechanism(mechanism_path, rows.ts);
    UnitExperiment e = rows_to_experiment(rows, mechanism);
    if (mechanism) {
      violations = validate_experiment(e);
      if (!violations.empty())
        throw ValidationError(input + ": stored probabilities disagree with --mechanism:\n" +
                              format_violations(violations));
    }
    units.push_back(std::move(e));
  }
  return units;
}

UnitExperiment load_single_unit(const std::string& input, const std::string& mechanism_path) {
  auto units = load_units(input, mechanism_path);
  if (units.size() != 1)
    throw ValidationError(input + ": expected a single unit, found " +
                          std::to_string(units.size()) + " (use `tsexp pool` for panels)");
  return std::move(units.front());
}

MPeriodContrast parse_m_period(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw SchemaError("--m-period: expected <target>:<comparison> bit strings, e.g. 11:00");
  auto bits = [&](const std::string& s) {
    if (s.empty()) throw SchemaError("--m-period: empty suffix");
    std::vector<std::uint8_t> out;
    for (char c : s) {
      if (c != '0' && c != '1') throw SchemaError("--m-period: suffixes must be 0/1 strings");
      out.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return out;
  };
  MPeriodContrast contrast;
  contrast.target = bits(text.substr(0, colon));
  contrast.comparison = bits(text.substr(colon + 1));
  if (contrast.target.size() != contrast.comparison.size())
    throw SchemaError("--m-period: suffixes must have equal length");
  return contrast;
}

// --------------------------------------------------------------------------
// simulate
// --------------------------------------------------------------------------

struct SimulateArgs {
  std::string input;  // process spec JSON
  std::string mechanism_path;
  std::string output_dir = ".";
  std::size_t T = 100;
  std::size_t max_p = 4;
  std::uint64_t seed = 0;
};

void cmd_simulate(const SimulateArgs& args) {
  const auto spec = process_spec_from_json_text(read_text_file(args.input));
  if (spec.sigma0 == 0.0 && spec.sigma1 == 0.0)
    throw ValidationError(
        "simulate: sigma0 = sigma1 = 0 produces deterministic outcomes; downstream tests "
        "need stochastic data, pick a positive scale");
  const AssignmentMechanism mechanism =
      args.mechanism_path.empty()
          ? AssignmentMechanism::bernoulli(0.5)
          : *load_mechanism(args.mechanism_path, {});

  const auto sim = simulate_process(spec, mechanism, args.T, split_seed(args.seed, 1),
                                    split_seed(args.seed, 2));
  UnitExperiment e("sim", {}, sim.outcomes, sim.treatments, mechanism, sim.prob_treated);

  fs::create_directories(args.output_dir);
  const auto csv_path = join_path(args.output_dir, "experiment.csv");
  write_experiment_csv(csv_path, e);

  std::ostringstream os;
  os << "{\n  \"true_effects\": [\n";
  for (std::size_t p = 0; p <= std::min(args.max_p, args.T - 1); ++p) {
    const auto tau = true_lag_effect(spec, sim.noise, sim.treatments, p);
    double bar = 0.0;
    for (double v : tau) bar += v;
    bar /= static_cast<double>(tau.size());
    os << "    {\"p\": " << p << ", \"tau_bar\": " << bar << ", \"per_t\": [";
    for (std::size_t i = 0; i < tau.size(); ++i) os << (i ? "," : "") << tau[i];
    os << "]}" << (p == std::min(args.max_p, args.T - 1) ? "" : ",") << "\n";
  }
  os << "  ]\n}\n";
  const auto true_path = join_path(args.output_dir, "true_effects.json");
  write_text_file(true_path, os.str());

  std::cout << "simulate: T=" << args.T << " seed=" << args.seed << " -> " << csv_path << ", "
            << true_path << "\n";
}

// --------------------------------------------------------------------------
// estimate
// --------------------------------------------------------------------------

struct EstimateArgs {
  std::string input;
  std::string mechanism_path;
  std::string output_dir = ".";
  std::size_t p = 0;
  std::size_t q = 0;
  bool proxy = false;
  std::string m_period;
};

void cmd_estimate(const EstimateArgs& args) {
  const auto e = load_single_unit(args.input, args.mechanism_path);
  EstimandSpec estimand;
  estimand.p = args.p;
  estimand.q = args.q;
  estimand.use_proxy = args.proxy;
  if (!args.m_period.empty()) estimand.m_period = parse_m_period(args.m_period);

  const auto result = estimate(e, estimand);
  fs::create_directories(args.output_dir);
  const auto out = join_path(args.output_dir, "estimate.json");
  write_text_file(out, estimate_result_to_json_text(result));

  const double half_width = 1.959963984540054 * std::sqrt(result.gamma_hat);
  std::printf("estimate: p=%zu q=%zu tau_bar_hat=%.6g gamma_hat=%.6g ci95=[%.6g, %.6g] -> %s\n",
              estimand.p, estimand.q, result.tau_bar_hat, result.gamma_hat,
              result.tau_bar_hat - half_width, result.tau_bar_hat + half_width, out.c_str());
}

// --------------------------------------------------------------------------
// test
// --------------------------------------------------------------------------

struct TestArgs {
  std::string input;
  std::string mechanism_path;
  std::string output_dir = ".";
  std::vector<std::size_t> ps{0};
  std::size_t q = 0;
  bool proxy = false;
  std::string method = "both";  // exact | conservative | both
  std::uint64_t M = 1000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double alpha = 0.05;
  std::string tie_rule = "strict";
  bool keep_null_draws = false;
  unsigned threads = 0;
};

void cmd_test(const TestArgs& args) {
  const bool run_exact = args.method == "exact" || args.method == "both";
  const bool run_conservative = args.method == "conservative" || args.method == "both";
  if (run_exact && !args.seed_set)
    throw ValidationError("test: --seed is required for the exact randomization test");

  const auto e = load_single_unit(args.input, args.mechanism_path);
  fs::create_directories(args.output_dir);

  ExactTestOptions options;
  options.tie_rule = args.tie_rule == "add-one" ? TieRule::kAddOne : TieRule::kStrict;
  options.keep_null_draws = args.keep_null_draws;
  options.threads = resolve_threads(args.threads);

  for (std::size_t p : args.ps) {
    EstimandSpec estimand;
    estimand.p = p;
    estimand.q = args.q;
    estimand.use_proxy = args.proxy;
    const std::string suffix = "p" + std::to_string(p) + "_q" + std::to_string(args.q);

    if (run_exact) {
      const auto r = exact_test(e, estimand, args.M, split_seed(args.seed, p + 1), options);
      const auto out = join_path(args.output_dir, "test_exact_" + suffix + ".json");
      write_text_file(out, test_result_to_json_text(r));
      std::printf("exact          p=%zu q=%zu estimate=%.6g p_value=%.6g M=%llu -> %s\n", p,
                  args.q, r.tau_bar_hat, r.p_value,
                  static_cast<unsigned long long>(r.replicates), out.c_str());
      if (args.keep_null_draws) {
        std::ostringstream os;
        os << "draw\n";
        for (double d : r.null_draws) os << d << "\n";
        write_text_file(join_path(args.output_dir, "null_draws_" + suffix + ".csv"), os.str());
      }
    }
    if (run_conservative) {
      const auto r = conservative_test(e, estimand);
      const auto out = join_path(args.output_dir, "test_conservative_" + suffix + ".json");
      write_text_file(out, test_result_to_json_text(r));
      if (r.small_sample)
        std::cerr << "warning: fewer than 30 contributing times; the normal approximation "
                     "behind the conservative test may be poor\n";
      if (r.degenerate)
        std::printf("conservative   p=%zu q=%zu estimate=%.6g statistic undefined "
                    "(all variance bounds zero) -> %s\n",
                    p, args.q, r.tau_bar_hat, out.c_str());
      else
        std::printf("conservative   p=%zu q=%zu estimate=%.6g z=%.6g p_value=%.6g -> %s\n", p,
                    args.q, r.tau_bar_hat, r.statistic, r.p_value, out.c_str());
    }
  }
}

// --------------------------------------------------------------------------
// pool
// --------------------------------------------------------------------------

struct PoolArgs {
  std::string input;
  std::string mechanism_path;
  std::string output_dir = ".";
  std::size_t p = 0;
  std::size_t q = 0;
  std::string method = "all";  // pooled-exact | pooled-conservative | fisher | all
  std::uint64_t M = 1000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string tie_rule = "strict";
  bool dependent = false;
  unsigned threads = 0;
};

void cmd_pool(const PoolArgs& args) {
  const bool run_exact = args.method == "pooled-exact" || args.method == "all";
  const bool run_conservative = args.method == "pooled-conservative" || args.method == "all";
  const bool run_fisher = args.method == "fisher" || args.method == "all";
  if ((run_exact || run_fisher) && !args.seed_set)
    throw ValidationError("pool: --seed is required for resampling-based methods");

  Panel panel(load_units(args.input, args.mechanism_path), !args.dependent);
  fs::create_directories(args.output_dir);

  EstimandSpec estimand;
  estimand.p = args.p;
  estimand.q = args.q;

  ExactTestOptions options;
  options.tie_rule = args.tie_rule == "add-one" ? TieRule::kAddOne : TieRule::kStrict;
  options.threads = resolve_threads(args.threads);

  auto emit = [&](const PooledResult& r, const char* name) {
    const auto out = join_path(args.output_dir, std::string("pool_") + name + ".json");
    write_text_file(out, pooled_result_to_json_text(r));
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    std::printf("%-19s estimate=%.6g statistic=%.6g p_value=%.6g -> %s\n", name,
                r.tau_bar_pooled, r.statistic, r.p_value, out.c_str());
  };

  if (run_exact)
    emit(pooled_exact_test(panel, estimand, args.M, split_seed(args.seed, 1), options),
         "pooled-exact");
  if (run_conservative) emit(pooled_conservative_test(panel, estimand), "pooled-conservative");
  if (run_fisher) {
    // Unit-level exact tests combined; zero p-values are clamped at 1/(M+1).
    std::vector<double> p_values;
    for (std::size_t i = 0; i < panel.size(); ++i) {
      const auto r = exact_test(panel.units()[i], estimand, args.M,
                                split_seed(split_seed(args.seed, 2), i + 1), options);
      p_values.push_back(r.p_value);
    }
    auto fisher = fisher_combine(p_values, args.M);
    for (std::size_t i = 0; i < panel.size(); ++i)
      fisher.per_unit[i].unit_id = panel.units()[i].unit_id();
    fisher.seed = args.seed;
    emit(fisher, "fisher");
  }
}

// --------------------------------------------------------------------------
// slip
// --------------------------------------------------------------------------

struct SlipArgs {
  std::string input;
  std::string mechanism_path;
  std::string output_dir = ".";
  std::string unit_id = "unit";
};

void cmd_slip(const SlipArgs& args) {
  if (args.mechanism_path.empty())
    throw ValidationError("slip: --mechanism is required (historical assignment probabilities)");
  auto orders = read_orders_csv(args.input);
  if (orders.empty()) throw ValidationError(args.input + ": no orders");

  // Resolve timestamp breakpoints against the sorted randomization times.
  std::vector<OrderRecord> sorted = orders;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.ts_ns != b.ts_ns) return a.ts_ns < b.ts_ns;
    return a.order_id < b.order_id;
  });
  std::vector<std::string> stamps;
  for (const auto& o : sorted) stamps.push_back(o.ts);
  const auto mechanism = *load_mechanism(args.mechanism_path, stamps);

  const auto series = orders_to_experiment(std::move(orders), args.unit_id, mechanism);
  for (const auto& w : series.warnings) std::cerr << "warning: " << w << "\n";

  fs::create_directories(args.output_dir);
  const auto out = join_path(args.output_dir, "experiment.csv");
  write_experiment_csv(out, series.experiment);
  std::cout << "slip: " << series.experiment.length() << " orders -> " << out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomization-based causal inference for time series experiments"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Draw one experiment from a potential process");
  sim->add_option("--input", sim_args.input, "Process spec JSON")->required();
  sim->add_option("--mechanism", sim_args.mechanism_path, "Assignment mechanism JSON");
  sim->add_option("--output-dir", sim_args.output_dir, "Output directory");
  sim->add_option("--T", sim_args.T, "Series length")->check(CLI::PositiveNumber);
  sim->add_option("--max-p", sim_args.max_p, "Largest lag in true_effects.json");
  sim->add_option("--seed", sim_args.seed, "Master seed")->required();

  EstimateArgs est_args;
  auto* est = app.add_subcommand("estimate", "Average lag/step causal estimate with bounds");
  est->add_option("--input", est_args.input, "Experiment CSV")->required();
  est->add_option("--mechanism", est_args.mechanism_path, "Assignment mechanism JSON");
  est->add_option("--output-dir", est_args.output_dir, "Output directory");
  est->add_option("--p", est_args.p, "Lag");
  est->add_option("--q", est_args.q, "Steps");
  est->add_flag("--proxy", est_args.proxy, "Adjust outcomes by the lagged-outcome proxy");
  est->add_option("--m-period", est_args.m_period,
                  "Finite-dependence contrast <target>:<comparison>, e.g. 11:00");

  TestArgs test_args;
  auto* tst = app.add_subcommand("test", "Randomization and conservative tests");
  tst->add_option("--input", test_args.input, "Experiment CSV")->required();
  tst->add_option("--mechanism", test_args.mechanism_path, "Assignment mechanism JSON");
  tst->add_option("--output-dir", test_args.output_dir, "Output directory");
  tst->add_option("--p", test_args.ps, "Lag(s); repeat for a sweep");
  tst->add_option("--q", test_args.q, "Steps");
  tst->add_flag("--proxy", test_args.proxy, "Adjust outcomes by the lagged-outcome proxy");
  tst->add_option("--method", test_args.method, "exact | conservative | both")
      ->check(CLI::IsMember({"exact", "conservative", "both"}));
  tst->add_option("--M", test_args.M, "Resampling replicates")->check(CLI::PositiveNumber);
  tst->add_option("--seed", test_args.seed, "Master seed")
      ->each([&](const std::string&) { test_args.seed_set = true; });
  tst->add_option("--alpha", test_args.alpha, "Level (reporting only)")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  tst->add_option("--tie-rule", test_args.tie_rule, "strict | add-one")
      ->check(CLI::IsMember({"strict", "add-one"}));
  tst->add_flag("--keep-null-draws", test_args.keep_null_draws,
                "Also write the resampled statistics");
  tst->add_option("--threads", test_args.threads, "Worker threads (0 = all cores)");

  PoolArgs pool_args;
  auto* pool = app.add_subcommand("pool", "Multi-unit pooled tests and Fisher combination");
  pool->add_option("--input", pool_args.input, "Panel CSV with unit_id column")->required();
  pool->add_option("--mechanism", pool_args.mechanism_path, "Assignment mechanism JSON");
  pool->add_option("--output-dir", pool_args.output_dir, "Output directory");
  pool->add_option("--p", pool_args.p, "Lag");
  pool->add_option("--q", pool_args.q, "Steps");
  pool->add_option("--method", pool_args.method,
                   "pooled-exact | pooled-conservative | fisher | all")
      ->check(CLI::IsMember({"pooled-exact", "pooled-conservative", "fisher", "all"}));
  pool->add_option("--M", pool_args.M, "Resampling replicates")->check(CLI::PositiveNumber);
  pool->add_option("--seed", pool_args.seed, "Master seed")
      ->each([&](const std::string&) { pool_args.seed_set = true; });
  pool->add_option("--tie-rule", pool_args.tie_rule, "strict | add-one")
      ->check(CLI::IsMember({"strict", "add-one"}));
  pool->add_flag("--dependent", pool_args.dependent,
                 "Mark units as dependently assigned (refuses methods needing independence)");
  pool->add_option("--threads", pool_args.threads, "Worker threads (0 = all cores)");

  SlipArgs slip_args;
  auto* slip = app.add_subcommand("slip", "Convert order/trade records to an experiment CSV");
  slip->add_option("--input", slip_args.input, "Orders CSV")->required();
  slip->add_option("--mechanism", slip_args.mechanism_path,
                   "Assignment mechanism JSON (required)");
  slip->add_option("--output-dir", slip_args.output_dir, "Output directory");
  slip->add_option("--unit-id", slip_args.unit_id, "Unit id for the output");

  tools::ReplicateConfig rep_args;
  bool rep_seed_set = false;
  auto* rep = app.add_subcommand("replicate", "Run the simulation-study harness");
  rep->add_option("--output-dir", rep_args.output_dir, "Output directory")->required();
  rep->add_option("--seed", rep_args.seed, "Master seed")
      ->each([&](const std::string&) { rep_seed_set = true; });
  rep->add_option("--outer", rep_args.outer, "Outer replications")->check(CLI::PositiveNumber);
  rep->add_option("--M", rep_args.M, "Resampling replicates per test")
      ->check(CLI::PositiveNumber);
  rep->add_option("--T", rep_args.T, "Series length")->check(CLI::PositiveNumber);
  rep->add_option("--alpha", rep_args.alpha, "Level");
  rep->add_option("--threads", rep_args.threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
    if (sim->parsed()) cmd_simulate(sim_args);
    if (est->parsed()) cmd_estimate(est_args);
    if (tst->parsed()) cmd_test(test_args);
    if (pool->parsed()) cmd_pool(pool_args);
    if (slip->parsed()) cmd_slip(slip_args);
    if (rep->parsed()) {
      if (!rep_seed_set) throw ValidationError("replicate: --seed is required");
      rep_args.threads = resolve_threads(rep_args.threads);
      tools::run_replicate(rep_args);
      std::cout << "replicate: wrote study files to " << rep_args.output_dir << "\n";
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
