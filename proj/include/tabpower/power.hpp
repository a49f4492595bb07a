#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tabpower/laws.hpp"
#include "tabpower/table.hpp"

namespace tabpower {

enum class TestKind { pearson, dcov_mle, dcov_unbiased };

const char* test_name(TestKind t);
TestKind test_from_name(const std::string& name);

struct PowerReport {
  TestKind test = TestKind::pearson;
  double alpha = 0.05;
  std::int64_t n = 0;
  double critical_value = 0.0;  // on the n-scaled statistic
  double theoretical_power = 0.0;
  std::optional<double> empirical_power;
  std::optional<double> mc_stderr;
  std::int64_t replicates_rejected_for_zero_marginals = 0;
};

// Asymptotic null law of the n-scaled statistic at an independent table.
NullLaw null_law(TestKind test, const JointTable& null_table);

// (1 - alpha) quantile of the asymptotic null law, on the n-scale.
double critical_value(TestKind test, const JointTable& null_table,
                      double alpha, const Method& method = {});

// Theorem-faithful second-order law of sqrt(n) (T - theta) at the given
// table: sigma from the closed-form gradients, quadratic weights from the
// numerical Hessian at the same table, and for the unbiased statistic the
// deterministic offset of its difference from the plug-in statistic.
SecondOrderLaw make_second_order_law(TestKind test, const JointTable& table,
                                     double n);

// Power of the level-alpha test at the fixed alternative, computed from the
// second-order law. Rejection {n T > q} is mapped to the sqrt(n)(T - theta)
// scale as {X > (q - n theta) / sqrt(n)}.
double theoretical_power(TestKind test, const AlternativeSpec& alt,
                         std::int64_t n, double alpha,
                         const Method& method = {});

// Pitman local-alternative baseline: noncentral chi-square power with
// ncp = n * sum c_ij^2 / (pi_i+ pi_+j).
double pitman_power(const AlternativeSpec& alt, std::int64_t n, double alpha);

}  // namespace tabpower
