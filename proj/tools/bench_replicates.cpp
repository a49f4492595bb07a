// Times the serial reference replicate kernel against the OpenMP one on the
// same workload and verifies they produce identical output.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "tabpower/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tp = tabpower;

namespace {

double time_seconds(const std::function<tp::ReplicateStats()>& fn,
                    tp::ReplicateStats& out) {
  auto start = std::chrono::steady_clock::now();
  out = fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  std::int64_t n = 5000;
  std::int64_t replications = 20000;
  int workers =
#ifdef _OPENMP
      omp_get_max_threads();
#else
      1;
#endif
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string flag = argv[i];
    long long value = std::atoll(argv[i + 1]);
    if (flag == "--n") n = value;
    else if (flag == "--replications") replications = value;
    else if (flag == "--workers") workers = static_cast<int>(value);
    else {
      std::fprintf(stderr, "usage: bench_replicates [--n N] [--replications R] [--workers W]\n");
      return 2;
    }
  }

  auto table = tp::scenario_table(tp::ScenarioKind::setting1, 1.0 / 40.0);
  const std::uint64_t seed = 4242;

  tp::ReplicateStats serial, parallel;
  double t_serial = time_seconds(
      [&] { return tp::run_replicates_serial(table, n, replications, seed); },
      serial);
  double t_omp = time_seconds(
      [&] {
        return tp::run_replicates_omp(table, n, replications, seed, workers);
      },
      parallel);

  bool identical = serial.pearson == parallel.pearson &&
                   serial.dcov_mle == parallel.dcov_mle &&
                   serial.dcov_unbiased == parallel.dcov_unbiased &&
                   serial.zero_marginal_count == parallel.zero_marginal_count;

  double units = static_cast<double>(replications) * static_cast<double>(n);
  std::printf("workload: %lld replicates x n=%lld (6x6 table)\n",
              static_cast<long long>(replications), static_cast<long long>(n));
  std::printf("serial:   %8.3f s  (%.1f M draws/s)\n", t_serial,
              units / t_serial / 1e6);
  std::printf("omp x%-3d: %8.3f s  (%.1f M draws/s), speedup %.2fx\n", workers,
              t_omp, units / t_omp / 1e6, t_serial / t_omp);
  std::printf("outputs identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
