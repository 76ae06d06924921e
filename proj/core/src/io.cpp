#include "tsexp/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tsexp/errors.hpp"
#include "tsexp/timestamp.hpp"

namespace tsexp {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') { cur.push_back('"'); ++i; }
        else quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::string& path) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw SchemaError(path + ": missing required column '" + name + "'");
  }

  std::optional<std::size_t> optional_column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open file");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path + ": empty file");
  table.header = split_csv_line(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != table.header.size())
      throw SchemaError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(table.header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

double parse_double(const std::string& text, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw SchemaError(where + ": cannot parse number '" + text + "'");
  return v;
}

std::int64_t parse_int(const std::string& text, const std::string& where) {
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0')
    throw SchemaError(where + ": cannot parse integer '" + text + "'");
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw SchemaError(what + ": malformed JSON");
  return j;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& what) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) { ok = true; break; }
    if (!ok) throw SchemaError(what + ": unknown field '" + item.key() + "'");
  }
}

double json_number(const json& j, const char* key, double fallback, const std::string& what) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw SchemaError(what + ": field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

std::vector<ExperimentRows> read_experiment_rows(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t col_t = table.column("t", path);
  const std::size_t col_ts = table.column("ts", path);
  const std::size_t col_y = table.column("y", path);
  const std::size_t col_w = table.column("w", path);
  const std::size_t col_p1 = table.column("p1", path);
  const auto col_unit = table.optional_column("unit_id");

  struct Row {
    std::int64_t t;
    std::string ts;
    double y;
    std::uint8_t w;
    double p1;
  };
  std::map<std::string, std::vector<Row>> by_unit;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::string where = path + ":" + std::to_string(i + 2);
    Row row;
    row.t = parse_int(r[col_t], where + " column t");
    row.ts = r[col_ts];
    row.y = parse_double(r[col_y], where + " column y");
    const double w = parse_double(r[col_w], where + " column w");
    if (w != 0.0 && w != 1.0) throw SchemaError(where + " column w: must be 0 or 1");
    row.w = static_cast<std::uint8_t>(w);
    row.p1 = parse_double(r[col_p1], where + " column p1");
    const std::string unit = col_unit ? r[*col_unit] : std::string();
    by_unit[unit].push_back(std::move(row));
  }
  if (by_unit.empty()) throw SchemaError(path + ": no data rows");

  std::vector<ExperimentRows> out;
  for (auto& [unit, rows] : by_unit) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.t < b.t; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].t == rows[i - 1].t)
        throw SchemaError(path + ": duplicate time label " + std::to_string(rows[i].t) +
                          (unit.empty() ? "" : " in unit '" + unit + "'"));
    }
    ExperimentRows er;
    er.unit_id = unit;
    for (auto& r : rows) {
      er.ts.push_back(std::move(r.ts));
      er.y.push_back(r.y);
      er.w.push_back(r.w);
      er.p1.push_back(r.p1);
    }
    out.push_back(std::move(er));
  }
  return out;
}

UnitExperiment rows_to_experiment(const ExperimentRows& rows,
                                  const std::optional<AssignmentMechanism>& mechanism) {
  const AssignmentMechanism mech =
      mechanism ? *mechanism : AssignmentMechanism::from_probability_series(rows.p1);
  return UnitExperiment(rows.unit_id, rows.ts, rows.y, TreatmentPath(rows.w), mech, rows.p1);
}

void write_experiment_csv(const std::string& path, const UnitExperiment& e) {
  std::ostringstream os;
  os << "t,ts,y,w,p1\n";
  for (std::size_t t = 1; t <= e.length(); ++t) {
    os << t << ',' << csv_escape(e.timestamps()[t - 1]) << ',' << format_double(e.outcome_at(t))
       << ',' << static_cast<int>(e.treatment_at(t)) << ','
       << format_double(e.prob_treated()[t - 1]) << '\n';
  }
  write_text_file(path, os.str());
}

void write_panel_csv(const std::string& path, const Panel& panel) {
  std::ostringstream os;
  os << "unit_id,t,ts,y,w,p1\n";
  for (const auto& e : panel.units()) {
    for (std::size_t t = 1; t <= e.length(); ++t) {
      os << csv_escape(e.unit_id()) << ',' << t << ',' << csv_escape(e.timestamps()[t - 1]) << ','
         << format_double(e.outcome_at(t)) << ',' << static_cast<int>(e.treatment_at(t)) << ','
         << format_double(e.prob_treated()[t - 1]) << '\n';
    }
  }
  write_text_file(path, os.str());
}

std::vector<OrderRecord> read_orders_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t col_id = table.column("order_id", path);
  const std::size_t col_ts = table.column("ts", path);
  const std::size_t col_side = table.column("side", path);
  const std::size_t col_mid = table.column("mid_price", path);
  const std::size_t col_method = table.column("method", path);
  const std::size_t col_tts = table.column("trade_ts", path);
  const std::size_t col_price = table.column("trade_price", path);
  const std::size_t col_vol = table.column("volume_fraction", path);

  std::vector<OrderRecord> orders;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::string where = path + ":" + std::to_string(i + 2);
    const std::string& id = r[col_id];
    if (id.empty()) throw SchemaError(where + ": empty order_id");

    auto it = index.find(id);
    if (it == index.end()) {
      OrderRecord o;
      o.order_id = id;
      o.ts = r[col_ts];
      o.ts_ns = parse_timestamp_ns(o.ts);
      const std::string& side = r[col_side];
      if (side == "buy") o.side = OrderSide::kBuy;
      else if (side == "sell") o.side = OrderSide::kSell;
      else throw SchemaError(where + ": side must be 'buy' or 'sell', got '" + side + "'");
      o.mid_price = parse_double(r[col_mid], where + " column mid_price");
      const std::string& method = r[col_method];
      if (method == "A") o.method_b = false;
      else if (method == "B") o.method_b = true;
      else throw SchemaError(where + ": method must be 'A' or 'B', got '" + method + "'");
      index.emplace(id, orders.size());
      orders.push_back(std::move(o));
      it = index.find(id);
    }
    TradeFill fill;
    fill.trade_ts = r[col_tts];
    fill.trade_ts_ns = parse_timestamp_ns(fill.trade_ts);
    fill.price = parse_double(r[col_price], where + " column trade_price");
    fill.volume_fraction = parse_double(r[col_vol], where + " column volume_fraction");
    orders[it->second].trades.push_back(std::move(fill));
  }
  return orders;
}

PotentialProcessSpec process_spec_from_json_text(const std::string& text) {
  const json j = parse_json(text, "process spec");
  reject_unknown_keys(
      j, {"family", "mu0", "mu1", "phi", "theta", "sigma0", "sigma1", "noise", "y0"},
      "process spec");
  if (!j.contains("family")) throw SchemaError("process spec: missing 'family'");

  PotentialProcessSpec spec;
  const std::string family = j.at("family").get<std::string>();
  if (family == "ar1") spec.family = ProcessFamily::kAr1;
  else if (family == "ma1") spec.family = ProcessFamily::kMa1;
  else throw SchemaError("process spec: family must be 'ar1' or 'ma1', got '" + family + "'");

  spec.mu0 = json_number(j, "mu0", 0.0, "process spec");
  spec.mu1 = json_number(j, "mu1", 0.0, "process spec");
  spec.phi = json_number(j, "phi", 0.0, "process spec");
  spec.theta = json_number(j, "theta", 0.0, "process spec");
  spec.sigma0 = json_number(j, "sigma0", 1.0, "process spec");
  spec.sigma1 = json_number(j, "sigma1", 1.0, "process spec");
  spec.y0 = json_number(j, "y0", 0.0, "process spec");
  if (j.contains("noise")) {
    const std::string noise = j.at("noise").get<std::string>();
    if (noise == "gaussian-standard") spec.noise = NoiseKind::kGaussianStandard;
    else if (noise == "cauchy-standard") spec.noise = NoiseKind::kCauchyStandard;
    else throw SchemaError("process spec: noise must be 'gaussian-standard' or 'cauchy-standard'");
  }
  check_spec(spec);
  return spec;
}

std::string process_spec_to_json_text(const PotentialProcessSpec& spec) {
  json j;
  j["family"] = spec.family == ProcessFamily::kAr1 ? "ar1" : "ma1";
  j["mu0"] = spec.mu0;
  j["mu1"] = spec.mu1;
  j["phi"] = spec.phi;
  j["theta"] = spec.theta;
  j["sigma0"] = spec.sigma0;
  j["sigma1"] = spec.sigma1;
  j["noise"] =
      spec.noise == NoiseKind::kGaussianStandard ? "gaussian-standard" : "cauchy-standard";
  j["y0"] = spec.y0;
  return j.dump(2) + "\n";
}

MechanismConfig mechanism_config_from_json_text(const std::string& text) {
  const json j = parse_json(text, "mechanism");
  reject_unknown_keys(j, {"kind", "pi", "breakpoints"}, "mechanism");
  if (!j.contains("kind")) throw SchemaError("mechanism: missing 'kind'");
  MechanismConfig cfg;
  cfg.kind = j.at("kind").get<std::string>();
  if (cfg.kind == "bernoulli-constant") {
    if (!j.contains("pi")) throw SchemaError("mechanism: bernoulli-constant needs 'pi'");
    cfg.pi = json_number(j, "pi", 0.5, "mechanism");
  } else if (cfg.kind == "bernoulli-piecewise") {
    if (!j.contains("breakpoints") || !j.at("breakpoints").is_array() ||
        j.at("breakpoints").empty())
      throw SchemaError("mechanism: bernoulli-piecewise needs a non-empty 'breakpoints' array");
    for (const auto& b : j.at("breakpoints")) {
      reject_unknown_keys(b, {"start", "start_ts", "pi"}, "mechanism breakpoint");
      MechanismConfig::Breakpoint bp;
      if (b.contains("start")) bp.start = b.at("start").get<std::int64_t>();
      if (b.contains("start_ts")) bp.start_ts = b.at("start_ts").get<std::string>();
      if (!bp.start && !bp.start_ts)
        throw SchemaError("mechanism breakpoint: needs 'start' or 'start_ts'");
      if (!b.contains("pi")) throw SchemaError("mechanism breakpoint: missing 'pi'");
      bp.pi = b.at("pi").get<double>();
      cfg.breakpoints.push_back(std::move(bp));
    }
  } else {
    throw SchemaError("mechanism: kind must be 'bernoulli-constant' or 'bernoulli-piecewise'");
  }
  return cfg;
}

AssignmentMechanism resolve_mechanism(const MechanismConfig& config,
                                      const std::vector<std::string>& timestamps) {
  if (config.kind == "bernoulli-constant") return AssignmentMechanism::bernoulli(config.pi);

  std::vector<std::int64_t> ts_ns;
  auto first_index_at_or_after = [&](const std::string& stamp) -> std::int64_t {
    if (timestamps.empty())
      throw SchemaError("mechanism: breakpoint uses start_ts but no timestamps are available");
    if (ts_ns.empty()) {
      ts_ns.reserve(timestamps.size());
      for (const auto& t : timestamps) ts_ns.push_back(parse_timestamp_ns(t));
    }
    const std::int64_t target = parse_timestamp_ns(stamp);
    for (std::size_t i = 0; i < ts_ns.size(); ++i)
      if (ts_ns[i] >= target) return static_cast<std::int64_t>(i) + 1;
    return static_cast<std::int64_t>(ts_ns.size()) + 1;  // past the sample: no effect
  };

  std::vector<ProbabilityBreakpoint> bps;
  for (const auto& b : config.breakpoints) {
    ProbabilityBreakpoint bp;
    bp.prob_treated = b.pi;
    bp.start_time = b.start ? *b.start : first_index_at_or_after(*b.start_ts);
    bps.push_back(bp);
  }
  // Ensure coverage from time 1.
  const auto min_start =
      std::min_element(bps.begin(), bps.end(), [](const auto& a, const auto& b) {
        return a.start_time < b.start_time;
      })->start_time;
  if (min_start > 1)
    throw SchemaError("mechanism: earliest breakpoint must cover time 1");
  return AssignmentMechanism::bernoulli_piecewise(std::move(bps));
}

std::string estimate_result_to_json_text(const EstimateResult& r) {
  json j;
  j["p"] = r.estimand.p;
  j["q"] = r.estimand.q;
  j["tau_bar_hat"] = r.tau_bar_hat;
  j["gamma_hat"] = r.gamma_hat;
  j["t_effective"] = r.t_effective;
  json per_t = json::array();
  for (const auto& e : r.per_t)
    per_t.push_back({{"t", e.t}, {"tau_hat", e.tau_hat}, {"sigma2_hat", e.sigma2_hat}});
  j["per_t"] = std::move(per_t);
  return j.dump(2) + "\n";
}

std::string test_result_to_json_text(const TestResult& r) {
  json j;
  j["method"] = to_string(r.method);
  j["statistic"] = r.statistic;
  j["tau_bar_hat"] = r.tau_bar_hat;
  j["gamma_hat"] = r.gamma_hat;
  j["p_value"] = r.p_value;
  j["replicates"] = r.replicates;
  j["seed"] = r.seed;
  if (r.degenerate) j["degenerate"] = true;
  return j.dump(2) + "\n";
}

std::string pooled_result_to_json_text(const PooledResult& r) {
  json j;
  j["method"] = to_string(r.method);
  j["tau_bar_pooled"] = r.tau_bar_pooled;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["replicates"] = r.replicates;
  j["seed"] = r.seed;
  json per_unit = json::array();
  for (const auto& u : r.per_unit)
    per_unit.push_back({{"unit_id", u.unit_id},
                        {"tau_bar_hat", u.tau_bar_hat},
                        {"gamma_hat", u.variance},
                        {"weight", u.weight},
                        {"p_value", u.p_value}});
  j["per_unit"] = std::move(per_unit);
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError(path + ": cannot open file for writing");
  out << content;
  if (!out) throw SchemaError(path + ": write failed");
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << "violation [" << v.rule << "]";
    if (v.time) os << " at t=" << *v.time;
    os << ": " << v.detail << '\n';
  }
  return os.str();
}

}  // namespace tsexp
