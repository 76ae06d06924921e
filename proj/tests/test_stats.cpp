#include <doctest.h>

#include <cmath>
#include <vector>

#include "tsexp/rng.hpp"
#include "tsexp/stats.hpp"

using namespace tsexp;

TEST_CASE("normal cdf and quantile agree with reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.0013498980316300946) == doctest::Approx(-3.0).epsilon(1e-10));
  // Round trip across the domain.
  for (double p : {1e-10, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1 - 1e-6}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-11));
  }
  CHECK(normal_two_sided_pvalue(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-10));
}

TEST_CASE("chi-square upper tail with even df") {
  // df = 2: Pr(X > x) = exp(-x/2).
  CHECK(chi_square_upper_tail_even(1, 5.991464547107979) ==
        doctest::Approx(0.05).epsilon(1e-12));
  CHECK(chi_square_upper_tail_even(1, 0.0) == doctest::Approx(1.0));
  // df = 4 at x = 9.487729: canonical 5% critical value.
  CHECK(chi_square_upper_tail_even(2, 9.48772903678115) ==
        doctest::Approx(0.05).epsilon(1e-6));
  // df = 20 mean: Pr(X > 20) for chi2_20 is about 0.4579.
  CHECK(chi_square_upper_tail_even(10, 20.0) == doctest::Approx(0.45793).epsilon(1e-4));
  // Large df stays finite and monotone in x.
  const double a = chi_square_upper_tail_even(500, 900.0);
  const double b = chi_square_upper_tail_even(500, 1100.0);
  CHECK(a > b);
  CHECK(a <= 1.0);
  CHECK(b >= 0.0);
}

TEST_CASE("ks distance of a uniform grid is small and of a constant is large") {
  std::vector<double> grid;
  for (int i = 0; i < 1000; ++i) grid.push_back((i + 0.5) / 1000.0);
  CHECK(ks_distance_uniform(grid) < 0.001);
  std::vector<double> clump(100, 0.9);
  CHECK(ks_distance_uniform(clump) == doctest::Approx(0.9));
}

TEST_CASE("qq correlation is high for gaussian draws, lower for cauchy") {
  Rng rng(7);
  std::vector<double> gauss(5000), cauchy(5000);
  for (auto& v : gauss) v = rng.next_gaussian();
  for (auto& v : cauchy) v = rng.next_cauchy();
  CHECK(qq_normal_correlation(gauss) > 0.999);
  CHECK(qq_normal_correlation(cauchy) < 0.9);
}

TEST_CASE("splitmix stream basics") {
  Rng a(42), b(42), c(43);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());
  CHECK(split_seed(1, 2) != split_seed(1, 3));
  CHECK(split_seed(1, 2) != split_seed(2, 2));

  // Uniform moments.
  Rng rng(99);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += rng.next_uniform();
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}
