#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tsexp {

// Standard normal CDF.
double normal_cdf(double z);

// Two-sided p-value for a standard normal statistic, 2*(1 - Phi(|z|)).
double normal_two_sided_pvalue(double z);

// Standard normal quantile. Acklam's rational approximation refined with one
// Halley step; absolute error below 1e-13 on (0, 1).
double normal_quantile(double p);

// Upper tail Pr(X > x) for X ~ chi-square with 2n degrees of freedom.
// Even df makes the tail a finite Poisson sum, computed in a numerically
// stable scaled form.
double chi_square_upper_tail_even(std::size_t n, double x);

double mean(std::span<const double> xs);

// Unbiased sample variance (divisor n-1).
double sample_variance(std::span<const double> xs);

// Kolmogorov-Smirnov distance between the empirical CDF of xs and the
// Uniform(0,1) CDF.
double ks_distance_uniform(std::span<const double> xs);

// Pearson correlation between the order statistics of xs and standard normal
// quantiles at Hazen plotting positions (i - 0.5)/n. A straight Q-Q plot
// gives a value near 1.
double qq_normal_correlation(std::span<const double> xs);

double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

}  // namespace tsexp
