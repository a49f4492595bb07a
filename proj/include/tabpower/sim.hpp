#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tabpower/power.hpp"
#include "tabpower/rng.hpp"
#include "tabpower/table.hpp"

namespace tabpower {

enum class ScenarioKind { setting1, setting2, custom };

// One of the two simulation models, or a user-supplied table. setting1 is a
// uniform 6x6 table with an alternating +-epsilon perturbation; setting2 is
// a 4x4 table with geometric marginals perturbed on the top-left 2x2 block.
struct Scenario {
  ScenarioKind kind = ScenarioKind::custom;
  double epsilon = 0.0;
  JointTable table;
};

JointTable scenario_table(ScenarioKind kind, double epsilon);
Scenario make_scenario(ScenarioKind kind, double epsilon);
Scenario custom_scenario(JointTable table);

// One multinomial draw of n observations from the table (stream 0 of seed).
CountTable sample_counts(const JointTable& table, std::int64_t n,
                         std::uint64_t seed);

// Multinomial draw into a preallocated flat buffer (column-major cells),
// by sequential conditional binomials. Exact and O(cells + n_p) per draw.
void multinomial_draw(RngStream& rng, const std::vector<double>& probs,
                      std::int64_t n, std::vector<std::int64_t>& out);

// n-scaled statistic values for R independent replicates. Replicate r draws
// from stream r of the seed, so the result is a pure function of
// (table, n, R, seed) regardless of worker count. Pearson entries are NaN
// for replicates with a zero sample marginal.
struct ReplicateStats {
  std::vector<double> pearson;        // n * Delta_n
  std::vector<double> dcov_mle;       // n * Dhat_n
  std::vector<double> dcov_unbiased;  // n * Dtil_n
  std::int64_t zero_marginal_count = 0;
};

// Serial reference implementation.
ReplicateStats run_replicates_serial(const JointTable& table, std::int64_t n,
                                     std::int64_t replications,
                                     std::uint64_t seed);
// OpenMP kernel; identical output for any worker count.
ReplicateStats run_replicates_omp(const JointTable& table, std::int64_t n,
                                  std::int64_t replications,
                                  std::uint64_t seed, int workers);
// Dispatch: workers <= 1 runs the serial reference.
ReplicateStats run_replicates(const JointTable& table, std::int64_t n,
                              std::int64_t replications, std::uint64_t seed,
                              int workers);

enum class NullMethod { asymptotic, monte_carlo };

// Critical value from a simulated finite-n null at the independence table
// with the scenario's marginals.
double mc_null_critical_value(TestKind test, const JointTable& null_table,
                              std::int64_t n, double alpha,
                              std::int64_t replications, std::uint64_t seed,
                              int workers);

std::vector<PowerReport> empirical_power_all(
    const std::vector<TestKind>& tests, const Scenario& scenario,
    std::int64_t n, double alpha, std::int64_t replications,
    std::uint64_t seed, NullMethod null_method = NullMethod::asymptotic,
    int workers = 1, const Method& law_method = {});

PowerReport empirical_power(TestKind test, const Scenario& scenario,
                            std::int64_t n, double alpha,
                            std::int64_t replications, std::uint64_t seed,
                            NullMethod null_method = NullMethod::asymptotic,
                            int workers = 1);

enum class StatScale { n_scale, sqrt_n_centered };

struct EmpiricalDistribution {
  TestKind statistic = TestKind::pearson;
  StatScale scale = StatScale::n_scale;
  std::vector<double> samples;  // sorted, zero-marginal replicates removed
  std::int64_t n = 0;
  std::int64_t replications = 0;
  std::int64_t rejected = 0;
  std::uint64_t seed = 0;
};

EmpiricalDistribution empirical_distribution(TestKind test,
                                             const Scenario& scenario,
                                             std::int64_t n, StatScale scale,
                                             std::int64_t replications,
                                             std::uint64_t seed,
                                             int workers = 1);

// Kolmogorov-Smirnov sup-distances used by the convergence checks.
double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf);
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace tabpower
