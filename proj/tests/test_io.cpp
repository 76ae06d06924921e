#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "tsexp/errors.hpp"
#include "tsexp/io.hpp"
#include "tsexp/timestamp.hpp"

using namespace tsexp;
using namespace tsexp::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "tsexp_io_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("timestamp parsing") {
  CHECK(parse_timestamp_ns("0") == 0);
  CHECK(parse_timestamp_ns("1.5") == 1500000000);
  CHECK(parse_timestamp_ns("1970-01-02") == 86400LL * 1000000000LL);
  CHECK(parse_timestamp_ns("2016-07-12") == 1468281600LL * 1000000000LL);
  CHECK(parse_timestamp_ns("2016-07-12 00:00:01") == 1468281601LL * 1000000000LL);
  CHECK(parse_timestamp_ns("2016-07-12T00:00:00.25") == 1468281600250000000LL);
  CHECK_THROWS_AS(parse_timestamp_ns("yesterday"), SchemaError);
  CHECK_THROWS_AS(parse_timestamp_ns("2016-13-01"), SchemaError);
  CHECK_THROWS_AS(parse_timestamp_ns(""), SchemaError);
}

TEST_CASE("experiment csv round trip") {
  TempDir tmp;
  std::vector<double> y{1.25, -0.5, 3.0};
  std::vector<std::uint8_t> w{1, 0, 1};
  UnitExperiment e("unit-7", {"10", "20", "30"}, y, TreatmentPath(w),
                   AssignmentMechanism::bernoulli(0.25));
  const auto path = tmp.file("exp.csv");
  write_experiment_csv(path, e);

  const auto rows = read_experiment_rows(path);
  REQUIRE(rows.size() == 1);
  const auto back = rows_to_experiment(rows[0]);
  CHECK(back.outcomes()[0] == e.outcomes()[0]);
  CHECK(back.treatments() == e.treatments());
  CHECK(back.prob_treated()[2] == e.prob_treated()[2]);
  CHECK(back.timestamps() == e.timestamps());

  SUBCASE("writing twice is byte-identical") {
    const auto text1 = read_text_file(path);
    write_experiment_csv(path, e);
    CHECK(read_text_file(path) == text1);
  }
}

TEST_CASE("experiment csv schema errors") {
  TempDir tmp;
  SUBCASE("missing column is reported by name") {
    const auto path = tmp.file("bad.csv");
    write_text_file(path, "t,ts,y,w\n1,1,0.5,1\n");
    CHECK_THROWS_WITH_AS(read_experiment_rows(path),
                         doctest::Contains("missing required column 'p1'"), SchemaError);
  }
  SUBCASE("non-binary treatment is rejected") {
    const auto path = tmp.file("bad2.csv");
    write_text_file(path, "t,ts,y,w,p1\n1,1,0.5,2,0.5\n");
    CHECK_THROWS_AS(read_experiment_rows(path), SchemaError);
  }
  SUBCASE("duplicate time labels are rejected") {
    const auto path = tmp.file("bad3.csv");
    write_text_file(path, "t,ts,y,w,p1\n1,1,0.5,1,0.5\n1,2,0.25,0,0.5\n");
    CHECK_THROWS_AS(read_experiment_rows(path), SchemaError);
  }
  SUBCASE("arbitrary ascending time labels are relabeled 1..T") {
    const auto path = tmp.file("gaps.csv");
    write_text_file(path, "t,ts,y,w,p1\n7,a,1,1,0.5\n3,b,2,0,0.5\n9,c,3,1,0.5\n");
    const auto rows = read_experiment_rows(path);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].y == std::vector<double>{2.0, 1.0, 3.0});  // sorted by t
    CHECK(rows[0].ts == std::vector<std::string>{"b", "a", "c"});
  }
}

TEST_CASE("panel csv groups by unit") {
  TempDir tmp;
  const auto path = tmp.file("panel.csv");
  write_text_file(path,
                  "unit_id,t,ts,y,w,p1\n"
                  "m2,1,1,0.5,1,0.5\n"
                  "m1,1,1,1.5,0,0.5\n"
                  "m1,2,2,-1.0,1,0.5\n");
  const auto rows = read_experiment_rows(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].unit_id == "m1");
  CHECK(rows[0].y.size() == 2);
  CHECK(rows[1].unit_id == "m2");
}

TEST_CASE("process spec json") {
  const auto spec = process_spec_from_json_text(
      R"({"family":"ar1","mu1":0.5,"phi":0.5,"noise":"gaussian-standard"})");
  CHECK(spec.family == ProcessFamily::kAr1);
  CHECK(spec.mu1 == 0.5);
  CHECK(spec.mu0 == 0.0);
  CHECK(spec.sigma0 == 1.0);

  const auto text = process_spec_to_json_text(spec);
  const auto back = process_spec_from_json_text(text);
  CHECK(back.mu1 == spec.mu1);
  CHECK(back.phi == spec.phi);

  CHECK_THROWS_AS(process_spec_from_json_text(R"({"mu1":0.5})"), SchemaError);
  CHECK_THROWS_AS(process_spec_from_json_text(R"({"family":"arma"})"), SchemaError);
  CHECK_THROWS_AS(process_spec_from_json_text(R"({"family":"ar1","muX":1})"), SchemaError);
  CHECK_THROWS_AS(process_spec_from_json_text("not json"), SchemaError);
  CHECK_THROWS_AS(process_spec_from_json_text(R"({"family":"ar1","sigma0":-1})"),
                  ValidationError);
}

TEST_CASE("mechanism json") {
  SUBCASE("constant") {
    const auto cfg = mechanism_config_from_json_text(R"({"kind":"bernoulli-constant","pi":0.3})");
    const auto mech = resolve_mechanism(cfg);
    CHECK(mech.prob_treated({}, {}) == doctest::Approx(0.3));
  }
  SUBCASE("piecewise by index") {
    const auto cfg = mechanism_config_from_json_text(
        R"({"kind":"bernoulli-piecewise","breakpoints":[{"start":1,"pi":0.5},{"start":3,"pi":0.25}]})");
    const auto mech = resolve_mechanism(cfg);
    std::vector<std::uint8_t> two{0, 0};
    CHECK(mech.prob_treated({}, {}) == doctest::Approx(0.5));
    CHECK(mech.prob_treated(two, {}) == doctest::Approx(0.25));
  }
  SUBCASE("piecewise by timestamp resolves against the data") {
    const auto cfg = mechanism_config_from_json_text(
        R"({"kind":"bernoulli-piecewise","breakpoints":[{"start":1,"pi":0.5},{"start_ts":"2016-07-12","pi":0.25}]})");
    const std::vector<std::string> stamps{"2016-07-10", "2016-07-11", "2016-07-13"};
    const auto mech = resolve_mechanism(cfg, stamps);
    std::vector<std::uint8_t> one{0}, two{0, 0};
    CHECK(mech.prob_treated({}, {}) == doctest::Approx(0.5));
    CHECK(mech.prob_treated(one, {}) == doctest::Approx(0.5));
    CHECK(mech.prob_treated(two, {}) == doctest::Approx(0.25));
  }
  SUBCASE("schema errors") {
    CHECK_THROWS_AS(mechanism_config_from_json_text(R"({"kind":"uniform"})"), SchemaError);
    CHECK_THROWS_AS(mechanism_config_from_json_text(R"({"kind":"bernoulli-constant"})"),
                    SchemaError);
    CHECK_THROWS_AS(
        mechanism_config_from_json_text(R"({"kind":"bernoulli-piecewise","breakpoints":[]})"),
        SchemaError);
  }
}

#ifdef TSEXP_SCHEMA_DIR
namespace {

// Structural check against the shipped schema: every required key present,
// no keys outside the declared properties.
void check_against_schema(const std::string& json_text, const char* schema_name) {
  const auto schema = nlohmann::json::parse(
      read_text_file(std::string(TSEXP_SCHEMA_DIR) + "/" + schema_name));
  const auto value = nlohmann::json::parse(json_text);
  for (const auto& key : schema.at("required"))
    CHECK_MESSAGE(value.contains(key.get<std::string>()),
                  "missing required key " << key << " for " << schema_name);
  const auto& props = schema.at("properties");
  for (const auto& item : value.items())
    CHECK_MESSAGE(props.contains(item.key()),
                  "unexpected key '" << item.key() << "' for " << schema_name);
}

}  // namespace

TEST_CASE("emitted json validates against the shipped schemas") {
  auto e = bernoulli_experiment({2.0, -1.0, 0.5, 3.0}, {1, 0, 0, 1});
  EstimandSpec estimand;
  check_against_schema(estimate_result_to_json_text(estimate(e, estimand)),
                       "estimate_result.schema.json");
  check_against_schema(test_result_to_json_text(exact_test(e, estimand, 50, 1)),
                       "test_result.schema.json");
  check_against_schema(test_result_to_json_text(conservative_test(e, estimand)),
                       "test_result.schema.json");
  std::vector<UnitExperiment> units;
  units.push_back(e);
  units.emplace_back("other", std::vector<std::string>{}, std::vector<double>{1.0, -2.0, 0.5, 1.5},
                     TreatmentPath({0, 1, 1, 0}), AssignmentMechanism::bernoulli(0.5));
  Panel panel(std::move(units));
  check_against_schema(pooled_result_to_json_text(pooled_exact_test(panel, estimand, 50, 2)),
                       "pooled_result.schema.json");
  check_against_schema(pooled_result_to_json_text(pooled_conservative_test(panel, estimand)),
                       "pooled_result.schema.json");
  check_against_schema(
      pooled_result_to_json_text(fisher_combine(std::vector<double>{0.2, 0.7}, 100)),
      "pooled_result.schema.json");
}
#endif

TEST_CASE("result json carries the required fields") {
  TestResult tr;
  tr.method = TestMethod::kExactRandomization;
  tr.statistic = 1.5;
  tr.p_value = 0.04;
  tr.replicates = 1000;
  tr.seed = 42;
  const auto text = test_result_to_json_text(tr);
  for (const char* key : {"\"method\"", "\"statistic\"", "\"p_value\"", "\"replicates\"",
                          "\"seed\""})
    CHECK(text.find(key) != std::string::npos);
  CHECK(text.find("exact-randomization") != std::string::npos);

  PooledResult pr;
  pr.method = TestMethod::kFisher;
  pr.per_unit.push_back({"u1", 0.5, 1.0, 1.0, 0.2});
  const auto ptext = pooled_result_to_json_text(pr);
  for (const char* key : {"\"method\"", "\"tau_bar_pooled\"", "\"p_value\"", "\"per_unit\"",
                          "\"unit_id\""})
    CHECK(ptext.find(key) != std::string::npos);
}

TEST_CASE("orders csv parsing") {
  TempDir tmp;
  const auto path = tmp.file("orders.csv");
  write_text_file(path,
                  "order_id,ts,side,mid_price,method,trade_ts,trade_price,volume_fraction\n"
                  "o1,2016-03-01 10:00:00,buy,100,A,2016-03-01 10:01:00,100.5,1\n"
                  "o2,2016-03-02 10:00:00,sell,200,B,2016-03-02 10:01:00,201,0.5\n"
                  "o2,2016-03-02 10:00:00,sell,200,B,2016-03-02 10:02:00,201,0.5\n");
  const auto orders = read_orders_csv(path);
  REQUIRE(orders.size() == 2);
  CHECK(orders[0].order_id == "o1");
  CHECK(orders[0].side == OrderSide::kBuy);
  CHECK(orders[0].trades.size() == 1);
  CHECK(orders[1].trades.size() == 2);
  CHECK(orders[1].method_b);

  SUBCASE("bad side or method rejected") {
    write_text_file(path,
                    "order_id,ts,side,mid_price,method,trade_ts,trade_price,volume_fraction\n"
                    "o1,1,hold,100,A,2,100.5,1\n");
    CHECK_THROWS_AS(read_orders_csv(path), SchemaError);
    write_text_file(path,
                    "order_id,ts,side,mid_price,method,trade_ts,trade_price,volume_fraction\n"
                    "o1,1,buy,100,C,2,100.5,1\n");
    CHECK_THROWS_AS(read_orders_csv(path), SchemaError);
  }
}
