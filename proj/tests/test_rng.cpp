#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "tabpower/rng.hpp"
#include "tabpower/special.hpp"

using namespace tabpower;

TEST_CASE("streams are deterministic and distinct") {
  RngStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool all_equal = true, differs_stream = false, differs_seed = false;
  for (int i = 0; i < 256; ++i) {
    auto va = a.next_u32();
    if (va != b.next_u32()) all_equal = false;
    if (va != c.next_u32()) differs_stream = true;
    if (va != d.next_u32()) differs_seed = true;
  }
  CHECK(all_equal);
  CHECK(differs_stream);
  CHECK(differs_seed);
}

TEST_CASE("uniforms live strictly inside (0,1) with the right moments") {
  RngStream rng(1, 0);
  const int m = 200000;
  double sum = 0, sum2 = 0, lo = 1, hi = 0;
  for (int i = 0; i < m; ++i) {
    double u = rng.uniform();
    sum += u;
    sum2 += u * u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  double mean = sum / m;
  double var = sum2 / m - mean * mean;
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(mean == doctest::Approx(0.5).epsilon(0.005));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("normals match the standard normal CDF") {
  RngStream rng(5, 2);
  const int m = 50000;
  std::vector<double> z(m);
  for (auto& v : z) v = rng.normal();
  std::sort(z.begin(), z.end());
  double d = 0;
  for (int i = 0; i < m; ++i) {
    double f = normal_cdf(z[i]);
    d = std::max(d, std::fabs(f - (i + 0.5) / m));
  }
  CHECK(d < 1.63 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("binomial edge cases") {
  RngStream rng(9, 0);
  CHECK(rng.binomial(0, 0.5) == 0);
  CHECK(rng.binomial(10, 0.0) == 0);
  CHECK(rng.binomial(10, 1.0) == 10);
  for (int i = 0; i < 100; ++i) {
    auto v = rng.binomial(7, 0.3);
    CHECK(v >= 0);
    CHECK(v <= 7);
  }
}

TEST_CASE("binomial small-case distribution (chi-square GOF)") {
  RngStream rng(17, 0);
  const int m = 200000, trials = 3;
  const double p = 0.4;
  std::map<int, int> freq;
  for (int i = 0; i < m; ++i) ++freq[static_cast<int>(rng.binomial(trials, p))];
  double chi = 0;
  for (int k = 0; k <= trials; ++k) {
    double binom = 1;
    for (int j = 0; j < k; ++j) binom *= (trials - j) / static_cast<double>(j + 1);
    double prob = binom * std::pow(p, k) * std::pow(1 - p, trials - k);
    double expect = m * prob;
    chi += std::pow(freq[k] - expect, 2) / expect;
  }
  CHECK(chi < chisq_quantile(0.999, trials));
}

TEST_CASE("binomial large-n moments (underflow regime for CDF recursions)") {
  RngStream rng(23, 1);
  const int m = 20000;
  const std::int64_t trials = 5000;
  const double p = 0.37;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < m; ++i) {
    double v = static_cast<double>(rng.binomial(trials, p));
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / m;
  double var = sum2 / m - mean * mean;
  double se_mean = std::sqrt(trials * p * (1 - p) / static_cast<double>(m));
  CHECK(std::fabs(mean - trials * p) < 4 * se_mean);
  CHECK(var == doctest::Approx(trials * p * (1 - p)).epsilon(0.05));
}
