#include <benchmark/benchmark.h>

#include <vector>

#include "tsexp/assignment.hpp"
#include "tsexp/estimators.hpp"
#include "tsexp/inference.hpp"
#include "tsexp/potential_process.hpp"
#include "tsexp/rng.hpp"

using namespace tsexp;

namespace {

PotentialProcessSpec bench_spec() {
  PotentialProcessSpec spec;
  spec.mu1 = 0.5;
  spec.phi = 0.5;
  return spec;
}

UnitExperiment bench_experiment(std::size_t T) {
  const auto mech = AssignmentMechanism::bernoulli(0.5);
  const auto sim = simulate_process(bench_spec(), mech, T, 1, 2);
  return UnitExperiment("bench", {}, sim.outcomes, sim.treatments, mech, sim.prob_treated);
}

void BM_sample_path(benchmark::State& state) {
  const auto mech = AssignmentMechanism::bernoulli(0.5);
  const std::size_t T = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_path(mech, {}, T, ++seed));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(T));
}
BENCHMARK(BM_sample_path)->Arg(100)->Arg(10000);

void BM_evaluate_path(benchmark::State& state) {
  const std::size_t T = static_cast<std::size_t>(state.range(0));
  const auto spec = bench_spec();
  const auto noise = draw_noise(spec, T, 7);
  const auto sp = sample_path(AssignmentMechanism::bernoulli(0.5), {}, T, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_path(spec, noise, sp.treatments));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(T));
}
BENCHMARK(BM_evaluate_path)->Arg(100)->Arg(10000);

void BM_ht_series_average(benchmark::State& state) {
  const auto e = bench_experiment(1000);
  const std::size_t p = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ht_series_average(e.outcomes(), e.treatments().values(), e.prob_treated(), p, 0));
  }
}
BENCHMARK(BM_ht_series_average)->Arg(0)->Arg(2);

void BM_exact_test(benchmark::State& state) {
  const auto e = bench_experiment(100);
  EstimandSpec estimand;
  const std::uint64_t M = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_test(e, estimand, M, 42));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(M));
}
BENCHMARK(BM_exact_test)->Arg(100)->Arg(1000);

void BM_sharp_null_variance(benchmark::State& state) {
  const auto e = bench_experiment(200);
  const std::size_t p = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    double acc = 0.0;
    for (std::size_t t = p + 1; t <= e.length(); ++t)
      acc += sharp_null_variance_at(e, t, p);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_sharp_null_variance)->Arg(1)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
