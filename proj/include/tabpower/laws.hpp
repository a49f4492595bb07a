#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tabpower {

// Raised when the characteristic-function integration cannot reach its
// accuracy target within the evaluation budget. Callers must treat this as
// a hard failure, never as an approximate answer.
class accuracy_error : public std::runtime_error {
 public:
  explicit accuracy_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Finite-sample approximating law
//   X = sigma * Z0 + (1 / (2 sqrt(n))) * sum_g weights[g] * Z_g^2 + shift / sqrt(n)
// with Z0, Z1, ... i.i.d. standard normal.
struct SecondOrderLaw {
  double sigma = 0.0;
  std::vector<double> weights;  // quadratic-term eigenvalue weights
  double shift = 0.0;           // deterministic 1/sqrt(n) offset
  double n = 1.0;

  double mean() const;
  double variance() const;
};

// Degenerate null laws of the n-scaled statistics: a chi-square with
// (I-1)(J-1) degrees of freedom, or sum_k weights[k] (Z_k^2 - 1) + shift.
struct NullLaw {
  enum class Kind { chi_square, weighted_centered };
  Kind kind = Kind::chi_square;
  double df = 0.0;
  std::vector<double> weights;
  double shift = 0.0;

  static NullLaw chi_square(double df);
  static NullLaw weighted_centered(std::vector<double> weights, double shift);

  double mean() const;
  double variance() const;
};

// Evaluation method. cf integrates the characteristic function (absolute
// CDF error target 1e-6); monte_carlo uses m law samples with the given
// seed.
struct Method {
  enum class Kind { cf_inversion, monte_carlo };
  Kind kind = Kind::cf_inversion;
  std::int64_t m = 100000;
  std::uint64_t seed = 0;

  static Method cf() { return Method{}; }
  static Method monte_carlo(std::int64_t m, std::uint64_t seed) {
    return Method{Kind::monte_carlo, m, seed};
  }
};

double cdf(const SecondOrderLaw& law, double x, const Method& method = {});
double cdf(const NullLaw& law, double x, const Method& method = {});
double quantile(const SecondOrderLaw& law, double p, const Method& method = {});
double quantile(const NullLaw& law, double p, const Method& method = {});

// Deterministic sampling: sample k is a pure function of (seed, k), so the
// output is independent of worker scheduling.
std::vector<double> sample(const SecondOrderLaw& law, std::int64_t m,
                           std::uint64_t seed, int workers = 1);
std::vector<double> sample(const NullLaw& law, std::int64_t m,
                           std::uint64_t seed, int workers = 1);

}  // namespace tabpower
