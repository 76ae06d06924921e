#pragma once

#include <cstdint>
#include <string>

namespace tsexp::tools {

struct ReplicateConfig {
  std::string output_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::uint64_t outer = 2000;   // outer replications for the p-value studies
  std::uint64_t M = 1000;       // resampling replicates per test
  std::size_t T = 100;          // series length of the base design
  double alpha = 0.05;
};

// Runs the five simulation studies and writes their raw draws and summary
// statistics under output_dir:
//   clt_draws.csv            fixed-outcome resampling draws of the average
//                            contemporaneous estimator (gaussian T, cauchy
//                            T x {1,10,100})
//   null_pvalues.csv         exact and conservative p-values under the null
//   power_mu.csv             rejection rates as the treated drift grows
//   power_phi.csv            rejection rates as persistence grows (one lag)
//   estimator_draws.csv      lag/step estimator draws for fixed outcomes
//   pooled_draws.csv         two-unit pooled and per-unit estimator draws
//   summary.json             headline statistics of all five studies
void run_replicate(const ReplicateConfig& config);

}  // namespace tsexp::tools
