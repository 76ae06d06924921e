#pragma once

#include <cstdint>
#include <vector>

#include "tsexp/experiment.hpp"
#include "tsexp/potential_process.hpp"
#include "tsexp/rng.hpp"

namespace tsexp::testing {

// Experiment with constant Bernoulli assignment and given data.
inline UnitExperiment bernoulli_experiment(std::vector<double> y, std::vector<std::uint8_t> w,
                                           double pi = 0.5) {
  return UnitExperiment("test", {}, std::move(y), TreatmentPath(std::move(w)),
                        AssignmentMechanism::bernoulli(pi));
}

inline PotentialProcessSpec ar_spec(double mu0, double mu1, double phi, double sigma0,
                                    double sigma1,
                                    NoiseKind noise = NoiseKind::kGaussianStandard) {
  PotentialProcessSpec spec;
  spec.family = ProcessFamily::kAr1;
  spec.mu0 = mu0;
  spec.mu1 = mu1;
  spec.phi = phi;
  spec.sigma0 = sigma0;
  spec.sigma1 = sigma1;
  spec.noise = noise;
  return spec;
}

inline PotentialProcessSpec ma_spec(double mu0, double mu1, double theta, double sigma0,
                                    double sigma1) {
  PotentialProcessSpec spec;
  spec.family = ProcessFamily::kMa1;
  spec.mu0 = mu0;
  spec.mu1 = mu1;
  spec.theta = theta;
  spec.sigma0 = sigma0;
  spec.sigma1 = sigma1;
  return spec;
}

}  // namespace tsexp::testing
