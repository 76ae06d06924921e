// End-to-end runs of the tsexp binary: exit codes, file outputs, error paths.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tsexp/io.hpp"

using namespace tsexp;
namespace fs = std::filesystem;

namespace {

struct CliFixture {
  fs::path dir;

  CliFixture() : dir(fs::temp_directory_path() / "tsexp_cli_test") {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~CliFixture() { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  // Returns the process exit code.
  int run(const std::string& args) const {
    const std::string cmd = std::string(TSEXP_CLI_PATH) + " " + args + " >" + path("stdout.txt") +
                            " 2>" + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }

  std::string stdout_text() const { return read_text_file(path("stdout.txt")); }
  std::string stderr_text() const { return read_text_file(path("stderr.txt")); }
};

const char* kArSpec =
    R"({"family":"ar1","mu0":0.0,"mu1":0.5,"phi":0.5,"sigma0":1.0,"sigma1":1.0,)"
    R"("noise":"gaussian-standard","y0":0.0})";

}  // namespace

TEST_CASE("simulate writes the experiment and true effects") {
  CliFixture f;
  write_text_file(f.path("spec.json"), kArSpec);
  CHECK(f.run("simulate --input " + f.path("spec.json") + " --T 50 --seed 3 --output-dir " +
              f.path("out")) == 0);
  CHECK(fs::exists(f.path("out/experiment.csv")));
  CHECK(fs::exists(f.path("out/true_effects.json")));

  SUBCASE("seed is required") {
    CHECK(f.run("simulate --input " + f.path("spec.json") + " --T 50") != 0);
  }
  SUBCASE("noiseless specs are refused") {
    write_text_file(f.path("flat.json"),
                    R"({"family":"ar1","mu1":0.5,"sigma0":0.0,"sigma1":0.0})");
    CHECK(f.run("simulate --input " + f.path("flat.json") + " --T 50 --seed 3") == 2);
  }
  SUBCASE("malformed spec exits with the schema code") {
    write_text_file(f.path("bad.json"), R"({"family":"arma"})");
    CHECK(f.run("simulate --input " + f.path("bad.json") + " --T 50 --seed 3") == 3);
  }
}

TEST_CASE("test command validates input and reports") {
  CliFixture f;
  write_text_file(f.path("spec.json"), kArSpec);
  REQUIRE(f.run("simulate --input " + f.path("spec.json") + " --T 60 --seed 5 --output-dir " +
                f.path("sim")) == 0);
  const std::string input = f.path("sim/experiment.csv");

  SUBCASE("happy path emits one line per method") {
    CHECK(f.run("test --input " + input + " --M 200 --seed 1 --output-dir " + f.path("t")) == 0);
    const auto out = f.stdout_text();
    CHECK(out.find("exact") != std::string::npos);
    CHECK(out.find("conservative") != std::string::npos);
    CHECK(fs::exists(f.path("t/test_exact_p0_q0.json")));
    CHECK(fs::exists(f.path("t/test_conservative_p0_q0.json")));
  }
  SUBCASE("missing column exits 3 and names it") {
    write_text_file(f.path("nocol.csv"), "t,ts,y,w\n1,1,0.5,1\n");
    CHECK(f.run("test --input " + f.path("nocol.csv") + " --M 10 --seed 1") == 3);
    CHECK(f.stderr_text().find("'p1'") != std::string::npos);
  }
  SUBCASE("degenerate stored probability exits 2 with the report") {
    write_text_file(f.path("degen.csv"),
                    "t,ts,y,w,p1\n1,1,0.5,1,0.5\n2,2,1.0,0,0\n3,3,0.25,1,0.5\n");
    CHECK(f.run("test --input " + f.path("degen.csv") + " --M 10 --seed 1") == 2);
    CHECK(f.stderr_text().find("probabilistic-assignment") != std::string::npos);
    CHECK(f.stderr_text().find("t=2") != std::string::npos);
  }
  SUBCASE("exact test needs a seed, conservative alone does not") {
    CHECK(f.run("test --input " + input + " --M 10 --method exact") == 2);
    CHECK(f.run("test --input " + input + " --method conservative --output-dir " +
                f.path("c")) == 0);
  }
  SUBCASE("p sweep emits one result per lag") {
    CHECK(f.run("test --input " + input + " --M 50 --seed 1 --p 0 --p 1 --p 2 --p 3 --p 4 "
                "--method exact --output-dir " + f.path("sweep")) == 0);
    for (int p = 0; p <= 4; ++p)
      CHECK(fs::exists(f.path("sweep/test_exact_p" + std::to_string(p) + "_q0.json")));
  }
  SUBCASE("reruns are byte-identical") {
    REQUIRE(f.run("test --input " + input + " --M 300 --seed 9 --keep-null-draws "
                  "--output-dir " + f.path("a")) == 0);
    REQUIRE(f.run("test --input " + input + " --M 300 --seed 9 --keep-null-draws --threads 3 "
                  "--output-dir " + f.path("b")) == 0);
    CHECK(read_text_file(f.path("a/test_exact_p0_q0.json")) ==
          read_text_file(f.path("b/test_exact_p0_q0.json")));
    CHECK(read_text_file(f.path("a/null_draws_p0_q0.csv")) ==
          read_text_file(f.path("b/null_draws_p0_q0.csv")));
  }
}

TEST_CASE("pool command") {
  CliFixture f;
  // Small two-unit panel.
  std::ostringstream panel;
  panel << "unit_id,t,ts,y,w,p1\n";
  const double y[] = {1.2, -0.7, 2.1, 0.4, -1.5, 0.9};
  const int w[] = {1, 0, 1, 1, 0, 1};
  for (const char* uid : {"m1", "m2"}) {
    for (int t = 1; t <= 6; ++t)
      panel << uid << ',' << t << ',' << t << ',' << y[t - 1] * (uid[1] == '2' ? -1.0 : 1.0)
            << ',' << w[t - 1] << ",0.5\n";
  }
  write_text_file(f.path("panel.csv"), panel.str());

  SUBCASE("all methods write their files") {
    CHECK(f.run("pool --input " + f.path("panel.csv") + " --M 100 --seed 2 --output-dir " +
                f.path("out")) == 0);
    CHECK(fs::exists(f.path("out/pool_pooled-exact.json")));
    CHECK(fs::exists(f.path("out/pool_pooled-conservative.json")));
    CHECK(fs::exists(f.path("out/pool_fisher.json")));
  }
  SUBCASE("dependent units refuse the conservative pooling") {
    CHECK(f.run("pool --input " + f.path("panel.csv") +
                " --method pooled-conservative --dependent") == 2);
  }
  SUBCASE("fisher on one unit works") {
    std::ostringstream single;
    single << "unit_id,t,ts,y,w,p1\n";
    for (int t = 1; t <= 6; ++t)
      single << "m1," << t << ',' << t << ',' << y[t - 1] << ',' << w[t - 1] << ",0.5\n";
    write_text_file(f.path("single.csv"), single.str());
    CHECK(f.run("pool --input " + f.path("single.csv") + " --method fisher --M 100 --seed 2 "
                "--output-dir " + f.path("fs")) == 0);
    CHECK(fs::exists(f.path("fs/pool_fisher.json")));
  }
}

TEST_CASE("slip command") {
  CliFixture f;
  write_text_file(f.path("orders.csv"),
                  "order_id,ts,side,mid_price,method,trade_ts,trade_price,volume_fraction\n"
                  "a,2016-05-01 09:00:00,buy,100,A,2016-05-01 09:01:00,100.5,1\n"
                  "b,2016-08-01 09:00:00,sell,200,B,2016-08-01 09:01:00,201,1\n");
  write_text_file(f.path("mech.json"),
                  R"({"kind":"bernoulli-piecewise","breakpoints":[{"start":1,"pi":0.5},)"
                  R"({"start_ts":"2016-07-12","pi":0.25}]})");

  SUBCASE("produces the experiment with regime probabilities") {
    CHECK(f.run("slip --input " + f.path("orders.csv") + " --mechanism " + f.path("mech.json") +
                " --output-dir " + f.path("out")) == 0);
    const auto rows = read_experiment_rows(f.path("out/experiment.csv"));
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].y.size() == 2);
    CHECK(rows[0].y[0] == doctest::Approx(-50.0));
    CHECK(rows[0].y[1] == doctest::Approx(50.0));
    CHECK(rows[0].w == std::vector<std::uint8_t>{0, 1});
    CHECK(rows[0].p1[0] == doctest::Approx(0.5));
    CHECK(rows[0].p1[1] == doctest::Approx(0.25));
  }
  SUBCASE("mechanism is required") {
    CHECK(f.run("slip --input " + f.path("orders.csv")) == 2);
  }
  SUBCASE("bad volume fractions abort naming the order") {
    write_text_file(f.path("badvol.csv"),
                    "order_id,ts,side,mid_price,method,trade_ts,trade_price,volume_fraction\n"
                    "oops,1,buy,100,A,2,100.5,0.4\n"
                    "oops,1,buy,100,A,3,100.2,0.4\n");
    CHECK(f.run("slip --input " + f.path("badvol.csv") + " --mechanism " + f.path("mech.json")) ==
          2);
    CHECK(f.stderr_text().find("oops") != std::string::npos);
  }
}

TEST_CASE("estimate command with proxy and m-period variants") {
  CliFixture f;
  write_text_file(f.path("spec.json"), kArSpec);
  REQUIRE(f.run("simulate --input " + f.path("spec.json") + " --T 40 --seed 8 --output-dir " +
                f.path("sim")) == 0);
  const std::string input = f.path("sim/experiment.csv");
  CHECK(f.run("estimate --input " + input + " --p 1 --output-dir " + f.path("e1")) == 0);
  CHECK(f.run("estimate --input " + input + " --p 0 --proxy --output-dir " + f.path("e2")) == 0);
  CHECK(f.run("estimate --input " + input + " --m-period 11:00 --output-dir " + f.path("e3")) ==
        0);
  CHECK(f.run("estimate --input " + input + " --m-period 11:0") == 3);
  CHECK(fs::exists(f.path("e1/estimate.json")));
  CHECK(fs::exists(f.path("e2/estimate.json")));
  CHECK(fs::exists(f.path("e3/estimate.json")));
}
