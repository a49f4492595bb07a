#include "tabpower/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tabpower/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tabpower {

JointTable scenario_table(ScenarioKind kind, double epsilon) {
  if (kind == ScenarioKind::custom)
    throw std::domain_error("scenario_table: custom scenarios carry their own table");
  if (kind == ScenarioKind::setting1) {
    const int d = 6;
    Matrix p(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        // 1-based (i+j) parity
        double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        p(i, j) = 1.0 / 36.0 + epsilon * sign;
        if (p(i, j) <= 0.0) {
          std::ostringstream os;
          os << "setting1: epsilon " << epsilon << " drives cell (" << i + 1
             << "," << j + 1 << ") to " << p(i, j);
          throw std::domain_error(os.str());
        }
      }
    return JointTable::from_probs(p);
  }
  const int d = 4;
  const double norm = (1.0 - std::pow(2.0, -d)) * (1.0 - std::pow(2.0, -d));
  Matrix p(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      p(i, j) = std::pow(2.0, -(i + j + 2)) / norm;
  p(0, 0) += epsilon;
  p(1, 1) += epsilon;
  p(0, 1) -= epsilon;
  p(1, 0) -= epsilon;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (p(i, j) < 0.0 || p(i, j) > 1.0) {
        std::ostringstream os;
        os << "setting2: epsilon " << epsilon << " drives cell (" << i + 1
           << "," << j + 1 << ") to " << p(i, j);
        throw std::domain_error(os.str());
      }
  return JointTable::from_probs(p);
}

Scenario make_scenario(ScenarioKind kind, double epsilon) {
  return Scenario{kind, epsilon, scenario_table(kind, epsilon)};
}

Scenario custom_scenario(JointTable table) {
  double eps = table.dependence_magnitude();
  return Scenario{ScenarioKind::custom, eps, std::move(table)};
}

void multinomial_draw(RngStream& rng, const std::vector<double>& probs,
                      std::int64_t n, std::vector<std::int64_t>& out) {
  const std::size_t cells = probs.size();
  out.assign(cells, 0);
  std::int64_t remaining = n;
  double mass = 1.0;
  for (std::size_t k = 0; k + 1 < cells; ++k) {
    if (remaining == 0) break;
    double p = mass > 0.0 ? probs[k] / mass : 1.0;
    p = std::clamp(p, 0.0, 1.0);
    std::int64_t draw = rng.binomial(remaining, p);
    out[k] = draw;
    remaining -= draw;
    mass -= probs[k];
  }
  out[cells - 1] += remaining;
}

CountTable sample_counts(const JointTable& table, std::int64_t n,
                         std::uint64_t seed) {
  if (n < 1) throw std::domain_error("sample_counts: n must be >= 1");
  const int I = table.rows(), J = table.cols();
  std::vector<double> probs(static_cast<std::size_t>(I) * J);
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < I; ++i)
      probs[static_cast<std::size_t>(j) * I + i] = table(i, j);
  RngStream rng(seed, 0);
  std::vector<std::int64_t> flat;
  multinomial_draw(rng, probs, n, flat);
  CountMatrix counts(I, J);
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < I; ++i)
      counts(i, j) = flat[static_cast<std::size_t>(j) * I + i];
  return CountTable::from_counts(std::move(counts));
}

namespace {

// Statistics for one replicate, written with plain loops: this runs inside
// the replicate kernel, 1e5+ times per call.
struct StatKernel {
  int I, J;
  std::vector<double> probs;  // column-major cell probabilities

  explicit StatKernel(const JointTable& table)
      : I(table.rows()), J(table.cols()),
        probs(static_cast<std::size_t>(I) * J) {
    for (int j = 0; j < J; ++j)
      for (int i = 0; i < I; ++i)
        probs[static_cast<std::size_t>(j) * I + i] = table(i, j);
  }

  // Returns {n*pearson (NaN on zero marginal), n*dcov_mle, n*dcov_unbiased}.
  void eval(const std::vector<std::int64_t>& counts, double n, double* out,
            bool* zero_marginal) const {
    double rm[64], cm[64];
    for (int i = 0; i < I; ++i) rm[i] = 0.0;
    for (int j = 0; j < J; ++j) cm[j] = 0.0;
    for (int j = 0; j < J; ++j)
      for (int i = 0; i < I; ++i) {
        double v = static_cast<double>(counts[static_cast<std::size_t>(j) * I + i]) / n;
        rm[i] += v;
        cm[j] += v;
      }
    double chi = 0.0, dev2 = 0.0, cross = 0.0;
    bool zero = false;
    for (int i = 0; i < I; ++i)
      if (rm[i] == 0.0) zero = true;
    for (int j = 0; j < J; ++j)
      if (cm[j] == 0.0) zero = true;
    for (int j = 0; j < J; ++j)
      for (int i = 0; i < I; ++i) {
        double v = static_cast<double>(counts[static_cast<std::size_t>(j) * I + i]) / n;
        double e = rm[i] * cm[j];
        double d = v - e;
        dev2 += d * d;
        cross += v * e;
        if (!zero) chi += d * d / e;
      }
    double sr = 0.0, sc = 0.0;
    for (int i = 0; i < I; ++i) sr += rm[i] * rm[i];
    for (int j = 0; j < J; ++j) sc += cm[j] * cm[j];
    double dtil = n / (n - 3.0) * dev2
                - 4.0 * n / ((n - 2.0) * (n - 3.0)) * cross
                + n / ((n - 1.0) * (n - 3.0)) * (sr + sc)
                + n * (3.0 * n - 2.0) / ((n - 1.0) * (n - 2.0) * (n - 3.0)) * sr * sc
                - n / ((n - 1.0) * (n - 3.0));
    out[0] = zero ? std::numeric_limits<double>::quiet_NaN() : n * chi;
    out[1] = n * dev2;
    out[2] = n * dtil;
    *zero_marginal = zero;
  }
};

void run_one(const StatKernel& kernel, std::int64_t n, std::uint64_t seed,
             std::int64_t r, std::vector<std::int64_t>& scratch,
             ReplicateStats& result) {
  RngStream rng(seed, static_cast<std::uint64_t>(r));
  multinomial_draw(rng, kernel.probs, n, scratch);
  double out[3];
  bool zero = false;
  kernel.eval(scratch, static_cast<double>(n), out, &zero);
  auto idx = static_cast<std::size_t>(r);
  result.pearson[idx] = out[0];
  result.dcov_mle[idx] = out[1];
  result.dcov_unbiased[idx] = out[2];
}

ReplicateStats make_result(std::int64_t replications) {
  ReplicateStats result;
  auto r = static_cast<std::size_t>(replications);
  result.pearson.resize(r);
  result.dcov_mle.resize(r);
  result.dcov_unbiased.resize(r);
  return result;
}

void count_zero_marginals(ReplicateStats& result) {
  std::int64_t zeros = 0;
  for (double v : result.pearson)
    if (std::isnan(v)) ++zeros;
  result.zero_marginal_count = zeros;
}

void check_replicate_args(std::int64_t n, std::int64_t replications, int I) {
  if (n < 4) throw std::domain_error("run_replicates: n must be >= 4");
  if (replications < 1)
    throw std::domain_error("run_replicates: replications must be >= 1");
  if (I > 64) throw std::domain_error("run_replicates: tables over 64 rows");
}

}  // namespace

ReplicateStats run_replicates_serial(const JointTable& table, std::int64_t n,
                                     std::int64_t replications,
                                     std::uint64_t seed) {
  check_replicate_args(n, replications, std::max(table.rows(), table.cols()));
  StatKernel kernel(table);
  ReplicateStats result = make_result(replications);
  std::vector<std::int64_t> scratch;
  for (std::int64_t r = 0; r < replications; ++r)
    run_one(kernel, n, seed, r, scratch, result);
  count_zero_marginals(result);
  return result;
}

ReplicateStats run_replicates_omp(const JointTable& table, std::int64_t n,
                                  std::int64_t replications,
                                  std::uint64_t seed, int workers) {
  check_replicate_args(n, replications, std::max(table.rows(), table.cols()));
  StatKernel kernel(table);
  ReplicateStats result = make_result(replications);
#ifdef _OPENMP
#pragma omp parallel num_threads(workers)
  {
    std::vector<std::int64_t> scratch;
#pragma omp for schedule(static)
    for (std::int64_t r = 0; r < replications; ++r)
      run_one(kernel, n, seed, r, scratch, result);
  }
#else
  std::vector<std::int64_t> scratch;
  for (std::int64_t r = 0; r < replications; ++r)
    run_one(kernel, n, seed, r, scratch, result);
#endif
  count_zero_marginals(result);
  return result;
}

ReplicateStats run_replicates(const JointTable& table, std::int64_t n,
                              std::int64_t replications, std::uint64_t seed,
                              int workers) {
  if (workers <= 1)
    return run_replicates_serial(table, n, replications, seed);
  return run_replicates_omp(table, n, replications, seed, workers);
}

double mc_null_critical_value(TestKind test, const JointTable& null_table,
                              std::int64_t n, double alpha,
                              std::int64_t replications, std::uint64_t seed,
                              int workers) {
  if (null_table.dependence_magnitude() > 1e-10)
    throw std::domain_error("mc_null_critical_value: table is not independent");
  ReplicateStats stats = run_replicates(null_table, n, replications, seed, workers);
  const std::vector<double>* vals = nullptr;
  switch (test) {
    case TestKind::pearson: vals = &stats.pearson; break;
    case TestKind::dcov_mle: vals = &stats.dcov_mle; break;
    case TestKind::dcov_unbiased: vals = &stats.dcov_unbiased; break;
  }
  std::vector<double> v;
  v.reserve(vals->size());
  for (double x : *vals)
    if (!std::isnan(x)) v.push_back(x);
  if (v.empty())
    throw std::domain_error("mc_null_critical_value: no usable replicates");
  std::sort(v.begin(), v.end());
  auto k = static_cast<std::int64_t>(
      std::ceil((1.0 - alpha) * static_cast<double>(v.size()))) - 1;
  k = std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(v.size()) - 1);
  return v[static_cast<std::size_t>(k)];
}

std::vector<PowerReport> empirical_power_all(
    const std::vector<TestKind>& tests, const Scenario& scenario,
    std::int64_t n, double alpha, std::int64_t replications,
    std::uint64_t seed, NullMethod null_method, int workers,
    const Method& law_method) {
  AlternativeSpec alt = AlternativeSpec::from_table(scenario.table);
  JointTable null_table = alt.null_table();
  ReplicateStats stats =
      run_replicates(scenario.table, n, replications, seed, workers);
  std::vector<PowerReport> reports;
  reports.reserve(tests.size());
  // A distinct stream block for null simulation keeps it independent of the
  // alternative's replicate streams.
  std::uint64_t null_seed = seed ^ 0x9E3779B97F4A7C15ull;
  for (TestKind test : tests) {
    PowerReport rep;
    rep.test = test;
    rep.alpha = alpha;
    rep.n = n;
    rep.critical_value =
        null_method == NullMethod::asymptotic
            ? critical_value(test, null_table, alpha, law_method)
            : mc_null_critical_value(test, null_table, n, alpha, replications,
                                     null_seed, workers);
    const std::vector<double>& vals =
        test == TestKind::pearson
            ? stats.pearson
            : (test == TestKind::dcov_mle ? stats.dcov_mle
                                          : stats.dcov_unbiased);
    std::int64_t rejections = 0, kept = 0;
    for (double v : vals) {
      if (std::isnan(v)) continue;
      ++kept;
      if (v > rep.critical_value) ++rejections;
    }
    rep.replicates_rejected_for_zero_marginals =
        test == TestKind::pearson ? stats.zero_marginal_count : 0;
    double p = kept > 0 ? static_cast<double>(rejections) /
                              static_cast<double>(kept)
                        : 0.0;
    rep.empirical_power = p;
    rep.mc_stderr = std::sqrt(p * (1.0 - p) / static_cast<double>(kept));
    if (!alt.is_null())
      rep.theoretical_power = theoretical_power(test, alt, n, alpha, law_method);
    else
      rep.theoretical_power = alpha;
    reports.push_back(std::move(rep));
  }
  return reports;
}

PowerReport empirical_power(TestKind test, const Scenario& scenario,
                            std::int64_t n, double alpha,
                            std::int64_t replications, std::uint64_t seed,
                            NullMethod null_method, int workers) {
  return empirical_power_all({test}, scenario, n, alpha, replications, seed,
                             null_method, workers)[0];
}

EmpiricalDistribution empirical_distribution(TestKind test,
                                             const Scenario& scenario,
                                             std::int64_t n, StatScale scale,
                                             std::int64_t replications,
                                             std::uint64_t seed, int workers) {
  ReplicateStats stats =
      run_replicates(scenario.table, n, replications, seed, workers);
  const std::vector<double>& vals =
      test == TestKind::pearson
          ? stats.pearson
          : (test == TestKind::dcov_mle ? stats.dcov_mle
                                        : stats.dcov_unbiased);
  double theta = 0.0;
  if (scale == StatScale::sqrt_n_centered)
    theta = test == TestKind::pearson ? pearson_functional(scenario.table)
                                      : dcov_functional(scenario.table);
  EmpiricalDistribution dist;
  dist.statistic = test;
  dist.scale = scale;
  dist.n = n;
  dist.replications = replications;
  dist.seed = seed;
  dist.samples.reserve(vals.size());
  const double root_n = std::sqrt(static_cast<double>(n));
  for (double v : vals) {
    if (std::isnan(v)) continue;
    // v is the n-scaled statistic; sqrt(n)(T - theta) = (v - n theta)/sqrt(n).
    dist.samples.push_back(scale == StatScale::n_scale
                               ? v
                               : (v - static_cast<double>(n) * theta) / root_n);
  }
  dist.rejected =
      static_cast<std::int64_t>(vals.size() - dist.samples.size());
  std::sort(dist.samples.begin(), dist.samples.end());
  return dist;
}

double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::domain_error("ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}

double ks_distance_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::domain_error("ks_distance_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace tabpower
