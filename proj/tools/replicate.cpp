#include "replicate.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "tsexp/estimators.hpp"
#include "tsexp/inference.hpp"
#include "tsexp/io.hpp"
#include "tsexp/parallel.hpp"
#include "tsexp/pooling.hpp"
#include "tsexp/potential_process.hpp"
#include "tsexp/rng.hpp"
#include "tsexp/stats.hpp"

namespace tsexp::tools {

namespace {

using nlohmann::json;

PotentialProcessSpec base_spec(double mu1, double phi, NoiseKind noise) {
  PotentialProcessSpec spec;
  spec.family = ProcessFamily::kAr1;
  spec.mu0 = 0.0;
  spec.mu1 = mu1;
  spec.phi = phi;
  spec.sigma0 = 1.0;
  spec.sigma1 = 1.0;
  spec.noise = noise;
  return spec;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Resampling draws of the average contemporaneous estimator with the
// potential outcomes fixed through one noise realization.
std::vector<double> fixed_outcome_draws(const PotentialProcessSpec& spec, std::size_t T,
                                        std::size_t p, std::size_t q, std::uint64_t R,
                                        std::uint64_t seed, unsigned threads) {
  const NoisePath noise = draw_noise(spec, T, split_seed(seed, 1));
  const auto mech = AssignmentMechanism::bernoulli(0.5);
  std::vector<double> draws(R);
  parallel_for(R, threads, [&](std::size_t m) {
    const auto sp = sample_path(mech, {}, T, split_seed(split_seed(seed, 2), m));
    const auto y = evaluate_path(spec, noise, sp.treatments);
    draws[m] = ht_series_average(y, sp.treatments.values(), sp.prob_treated, p, q);
  });
  return draws;
}

}  // namespace

void run_replicate(const ReplicateConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  auto out_path = [&](const char* name) { return (fs::path(config.output_dir) / name).string(); };

  json summary;
  summary["seed"] = config.seed;
  summary["outer"] = config.outer;
  summary["M"] = config.M;
  summary["T"] = config.T;

  // --- Study (a): sampling shape of the estimator, fixed potential outcomes.
  {
    const std::uint64_t R = std::max<std::uint64_t>(config.outer * 5, 2000);
    std::ostringstream csv;
    csv << "noise,T,draw\n";
    json shapes = json::array();
    struct Case {
      const char* label;
      NoiseKind kind;
      std::size_t T;
    };
    const Case cases[] = {{"gaussian", NoiseKind::kGaussianStandard, config.T},
                          {"cauchy", NoiseKind::kCauchyStandard, config.T},
                          {"cauchy", NoiseKind::kCauchyStandard, config.T * 10},
                          {"cauchy", NoiseKind::kCauchyStandard, config.T * 100}};
    std::size_t idx = 0;
    for (const auto& c : cases) {
      const auto spec = base_spec(0.2, 0.5, c.kind);
      const auto draws = fixed_outcome_draws(spec, c.T, 0, 0, R, split_seed(config.seed, 10 + idx),
                                             config.threads);
      for (double d : draws) csv << c.label << ',' << c.T << ',' << fmt(d) << '\n';
      json row;
      row["noise"] = c.label;
      row["T"] = c.T;
      row["qq_normal_correlation"] = qq_normal_correlation(draws);
      row["mean"] = mean(draws);
      row["variance"] = sample_variance(draws);
      shapes.push_back(std::move(row));
      ++idx;
    }
    write_text_file(out_path("clt_draws.csv"), csv.str());
    summary["clt"] = std::move(shapes);
  }

  // --- Study (b): p-value distributions under the null.
  {
    const auto spec = base_spec(0.0, 0.5, NoiseKind::kGaussianStandard);
    const auto mech = AssignmentMechanism::bernoulli(0.5);
    EstimandSpec estimand;
    std::vector<double> p_exact(config.outer), p_cons(config.outer);
    const std::uint64_t study_seed = split_seed(config.seed, 20);
    parallel_for(config.outer, config.threads, [&](std::size_t r) {
      const std::uint64_t rep_seed = split_seed(study_seed, r + 1);
      const auto sim = simulate_process(spec, mech, config.T, split_seed(rep_seed, 1),
                                        split_seed(rep_seed, 2));
      UnitExperiment e("sim", {}, sim.outcomes, sim.treatments, mech, sim.prob_treated);
      p_exact[r] = exact_test(e, estimand, config.M, split_seed(rep_seed, 3)).p_value;
      p_cons[r] = conservative_test(e, estimand).p_value;
    });
    std::ostringstream csv;
    csv << "replication,p_exact,p_conservative\n";
    for (std::size_t r = 0; r < config.outer; ++r)
      csv << r + 1 << ',' << fmt(p_exact[r]) << ',' << fmt(p_cons[r]) << '\n';
    write_text_file(out_path("null_pvalues.csv"), csv.str());

    auto rejection = [&](const std::vector<double>& ps) {
      std::size_t c = 0;
      for (double p : ps) c += p <= config.alpha ? 1 : 0;
      return static_cast<double>(c) / static_cast<double>(ps.size());
    };
    json null_study;
    null_study["exact_rejection"] = rejection(p_exact);
    null_study["conservative_rejection"] = rejection(p_cons);
    null_study["exact_ks_uniform"] = ks_distance_uniform(p_exact);
    summary["null"] = std::move(null_study);
  }

  // --- Study (c): power in the treated drift and in the persistence.
  {
    EstimandSpec estimand;
    PowerStudyConfig pc;
    pc.T = config.T;
    pc.M = config.M;
    pc.outer = config.outer;
    pc.alpha = config.alpha;
    pc.threads = config.threads;

    auto write_power = [&](const char* file, std::span<const PowerPoint> points,
                           const char* xname) {
      std::ostringstream csv;
      csv << xname << ",exact_rejection,conservative_rejection,mc_se_exact,mc_se_conservative\n";
      for (const auto& pt : points)
        csv << fmt(pt.x) << ',' << fmt(pt.exact_rejection) << ',' << fmt(pt.conservative_rejection)
            << ',' << fmt(pt.mc_se_exact) << ',' << fmt(pt.mc_se_conservative) << '\n';
      write_text_file(out_path(file), csv.str());
    };

    std::vector<PotentialProcessSpec> mu_grid;
    std::vector<double> mu_xs;
    for (double mu1 : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}) {
      mu_grid.push_back(base_spec(mu1, 0.5, NoiseKind::kGaussianStandard));
      mu_xs.push_back(mu1);
    }
    const auto mu_points = power_curve(mu_grid, mu_xs, AssignmentMechanism::bernoulli(0.5),
                                       estimand, pc, split_seed(config.seed, 30));
    write_power("power_mu.csv", mu_points, "mu1");

    EstimandSpec lag1;
    lag1.p = 1;
    std::vector<PotentialProcessSpec> phi_grid;
    std::vector<double> phi_xs;
    for (double phi : {0.0, 0.25, 0.5, 0.75, 0.9}) {
      phi_grid.push_back(base_spec(0.5, phi, NoiseKind::kGaussianStandard));
      phi_xs.push_back(phi);
    }
    const auto phi_points = power_curve(phi_grid, phi_xs, AssignmentMechanism::bernoulli(0.5),
                                        lag1, pc, split_seed(config.seed, 31));
    write_power("power_phi.csv", phi_points, "phi");

    json power;
    power["mu_exact"] = json::array();
    for (const auto& pt : mu_points) power["mu_exact"].push_back(pt.exact_rejection);
    power["phi_exact"] = json::array();
    for (const auto& pt : phi_points) power["phi_exact"].push_back(pt.exact_rejection);
    summary["power"] = std::move(power);
  }

  // --- Study (d): lag and step estimator draws for fixed potential outcomes.
  {
    const std::uint64_t R = std::max<std::uint64_t>(config.outer * 5, 2000);
    std::ostringstream csv;
    csv << "mu1,estimator,draw\n";
    json rows = json::array();
    std::size_t idx = 0;
    for (double mu1 : {0.0, 0.2}) {
      const auto spec = base_spec(mu1, 0.5, NoiseKind::kGaussianStandard);
      struct Est {
        const char* label;
        std::size_t p, q;
      };
      for (const Est est : {Est{"tau0", 0, 0}, Est{"tau0_step1", 0, 1}, Est{"tau1", 1, 0},
                            Est{"tau2", 2, 0}}) {
        const auto draws = fixed_outcome_draws(spec, config.T, est.p, est.q, R,
                                               split_seed(config.seed, 40 + idx), config.threads);
        for (double d : draws) csv << fmt(mu1) << ',' << est.label << ',' << fmt(d) << '\n';
        json row;
        row["mu1"] = mu1;
        row["estimator"] = est.label;
        row["mean"] = mean(draws);
        row["variance"] = sample_variance(draws);
        rows.push_back(std::move(row));
        ++idx;
      }
    }
    write_text_file(out_path("estimator_draws.csv"), csv.str());
    summary["estimators"] = std::move(rows);
  }

  // --- Study (e): two-unit pooled estimator, fixed potential outcomes.
  {
    const std::uint64_t R = std::max<std::uint64_t>(config.outer * 5, 2000);
    const auto spec = base_spec(0.0, 0.5, NoiseKind::kGaussianStandard);
    const std::uint64_t study_seed = split_seed(config.seed, 50);
    const NoisePath noise1 = draw_noise(spec, config.T, split_seed(study_seed, 1));
    const NoisePath noise2 = draw_noise(spec, config.T, split_seed(study_seed, 2));
    const auto mech = AssignmentMechanism::bernoulli(0.5);

    // Inverse-variance weights from the sharp-null variances of each unit's
    // fixed outcome series (computed on a reference path).
    auto null_variance_mean = [&](const NoisePath& noise) {
      std::vector<std::uint8_t> ones(config.T, 1);
      const auto y = evaluate_path(spec, noise, ones);
      // Bernoulli(1/2), p = 0: per-t null variance is y^2 / (1/4).
      double s = 0.0;
      for (double v : y) s += 4.0 * v * v;
      return s / static_cast<double>(config.T);
    };
    const double g1 = null_variance_mean(noise1);
    const double g2 = null_variance_mean(noise2);
    const double denom = static_cast<double>(config.T) / g1 + static_cast<double>(config.T) / g2;
    const double w1 = (static_cast<double>(config.T) / g1) / denom;
    const double w2 = (static_cast<double>(config.T) / g2) / denom;

    std::vector<double> d1(R), d2(R), pooled(R);
    parallel_for(R, config.threads, [&](std::size_t m) {
      const auto sp1 = sample_path(mech, {}, config.T, split_seed(split_seed(study_seed, 3), m));
      const auto sp2 = sample_path(mech, {}, config.T, split_seed(split_seed(study_seed, 4), m));
      const auto y1 = evaluate_path(spec, noise1, sp1.treatments);
      const auto y2 = evaluate_path(spec, noise2, sp2.treatments);
      d1[m] = ht_series_average(y1, sp1.treatments.values(), sp1.prob_treated, 0, 0);
      d2[m] = ht_series_average(y2, sp2.treatments.values(), sp2.prob_treated, 0, 0);
      pooled[m] = w1 * d1[m] + w2 * d2[m];
    });
    std::ostringstream csv;
    csv << "replicate,unit1,unit2,pooled\n";
    for (std::size_t m = 0; m < R; ++m)
      csv << m + 1 << ',' << fmt(d1[m]) << ',' << fmt(d2[m]) << ',' << fmt(pooled[m]) << '\n';
    write_text_file(out_path("pooled_draws.csv"), csv.str());

    json pooled_summary;
    pooled_summary["var_unit1"] = sample_variance(d1);
    pooled_summary["var_unit2"] = sample_variance(d2);
    pooled_summary["var_pooled"] = sample_variance(pooled);
    pooled_summary["qq_normal_correlation"] = qq_normal_correlation(pooled);
    summary["pooled"] = std::move(pooled_summary);
  }

  write_text_file(out_path("summary.json"), summary.dump(2) + "\n");
}

}  // namespace tsexp::tools
