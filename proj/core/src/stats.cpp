#include "tsexp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsexp {

double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

double normal_two_sided_pvalue(double z) {
  return std::erfc(std::abs(z) * 0.70710678118654752440);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");

  // Acklam (2003) rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley refinement against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * 3.1415926535897932385) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

double chi_square_upper_tail_even(std::size_t n, double x) {
  if (n == 0) throw std::invalid_argument("chi_square_upper_tail_even: n must be >= 1");
  if (x <= 0.0) return 1.0;
  // Pr(chi2_{2n} > x) = Pr(Poisson(x/2) <= n-1), accumulated in log space to
  // stay finite for large n or x.
  const double lambda = 0.5 * x;
  const double log_lambda = std::log(lambda);
  double log_term = -lambda;  // j = 0
  double sum = std::exp(log_term);
  for (std::size_t j = 1; j < n; ++j) {
    log_term += log_lambda - std::log(static_cast<double>(j));
    sum += std::exp(log_term);
  }
  return std::min(1.0, sum);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty input");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 values");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double ks_distance_uniform(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("ks_distance_uniform: empty input");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double hi = (static_cast<double>(i) + 1.0) / n - s[i];
    const double lo = s[i] - static_cast<double>(i) / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("pearson_correlation: need two equally sized series");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::invalid_argument("pearson_correlation: degenerate series");
  return sxy / std::sqrt(sxx * syy);
}

double qq_normal_correlation(std::span<const double> xs) {
  if (xs.size() < 3) throw std::invalid_argument("qq_normal_correlation: need at least 3 values");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  std::vector<double> q(s.size());
  const double n = static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    q[i] = normal_quantile((static_cast<double>(i) + 0.5) / n);
  return pearson_correlation(s, q);
}

}  // namespace tsexp
