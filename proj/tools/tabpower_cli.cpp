// Command-line front end: power calculation, simulation, null-law
// inspection, and reproduction of the tabulated/figure outputs as
// deterministic batch runs.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabpower/delta.hpp"
#include "tabpower/io.hpp"
#include "tabpower/laws.hpp"
#include "tabpower/power.hpp"
#include "tabpower/sim.hpp"
#include "tabpower/special.hpp"
#include "tabpower/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tp = tabpower;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240817;

struct CommonOpts {
  int setting = 0;  // 0 = none (custom table)
  std::string table_path;
  std::string epsilon_text;
  std::vector<std::int64_t> n_values;
  double alpha = 0.05;
  std::vector<std::string> test_names;
  std::int64_t replications = 10000;
  std::optional<std::uint64_t> seed;
  std::string method = "cf";
  std::string null_method = "asymptotic";
  std::string format = "csv";
  std::string out_dir;
  bool dump_internals = false;
  int workers = 0;
};

std::uint64_t resolve_seed(const CommonOpts& opts) {
  if (opts.seed) return *opts.seed;
  if (const char* env = std::getenv("TABPOWER_SEED"))
    return std::strtoull(env, nullptr, 10);
  return kDefaultSeed;
}

int resolve_workers(const CommonOpts& opts) {
  if (opts.workers > 0) return opts.workers;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

tp::Method resolve_method(const CommonOpts& opts, std::uint64_t seed) {
  if (opts.method == "mc") return tp::Method::monte_carlo(100000, seed);
  return tp::Method::cf();
}

std::vector<tp::TestKind> resolve_tests(const CommonOpts& opts) {
  if (opts.test_names.empty())
    return {tp::TestKind::pearson, tp::TestKind::dcov_mle,
            tp::TestKind::dcov_unbiased};
  std::vector<tp::TestKind> tests;
  for (const auto& name : opts.test_names)
    tests.push_back(tp::test_from_name(name));
  return tests;
}

tp::Scenario resolve_scenario(const CommonOpts& opts, double epsilon) {
  if (opts.setting == 1)
    return tp::make_scenario(tp::ScenarioKind::setting1, epsilon);
  if (opts.setting == 2)
    return tp::make_scenario(tp::ScenarioKind::setting2, epsilon);
  if (opts.table_path.empty())
    throw std::domain_error("either --setting or --table is required");
  return tp::custom_scenario(tp::joint_table_from_csv_file(opts.table_path));
}

// The resolved configuration embedded in every artifact. The worker count
// is deliberately absent: results are identical for any worker count, so it
// is an execution detail, not part of the artifact's identity.
json config_json(const std::string& command, const CommonOpts& opts,
                 std::uint64_t seed) {
  json j;
  j["command"] = command;
  if (opts.setting) j["setting"] = opts.setting;
  if (!opts.table_path.empty()) j["table"] = opts.table_path;
  if (!opts.epsilon_text.empty()) {
    j["epsilon"] = opts.epsilon_text;
    j["epsilon_value"] = tp::parse_fraction(opts.epsilon_text);
  }
  j["n"] = opts.n_values;
  j["alpha"] = opts.alpha;
  json tests = json::array();
  for (auto t : resolve_tests(opts)) tests.push_back(tp::test_name(t));
  j["tests"] = tests;
  j["method"] = opts.method;
  j["null_method"] = opts.null_method;
  j["replications"] = opts.replications;
  j["seed"] = seed;
  j["format"] = opts.format;
  return j;
}

void emit(const std::string& text, const std::string& out_dir,
          const std::string& filename) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream out(std::filesystem::path(out_dir) / filename,
                    std::ios::binary);
  if (!out) throw std::runtime_error("cannot write to " + out_dir);
  out << text;
}

json matrix_json(const tp::Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

json internals_json(const tp::AlternativeSpec& alt, double alpha) {
  json j;
  tp::JointTable table = alt.induced_table();
  tp::JointTable null_table = alt.null_table();
  tp::Matrix sigma = tp::sigma_star(table);
  j["sigma_star"] = matrix_json(sigma);
  if (!alt.is_null()) {
    j["grad_pearson"] = matrix_json(tp::grad_pearson(alt));
    j["grad_dcov"] = matrix_json(tp::grad_dcov(alt));
    j["sigma_pearson"] =
        std::sqrt(tp::asymptotic_variance(tp::grad_pearson(alt), sigma));
    j["sigma_dcov"] =
        std::sqrt(tp::asymptotic_variance(tp::grad_dcov(alt), sigma));
    j["weights_pearson"] = tp::second_order_weights(
        sigma, tp::numeric_hessian(tp::Functional::pearson, table));
    j["weights_dcov"] = tp::second_order_weights(
        sigma, tp::numeric_hessian(tp::Functional::dcov, table));
  }
  j["null_weights"] = tp::nonzero_weights(tp::null_weights_dcov(null_table));
  j["lemma1_null"] = tp::lemma1_constant(null_table);
  j["lemma1_alternative"] = tp::lemma1_constant(table);
  j["critical_values"] = {
      {"pearson",
       tp::critical_value(tp::TestKind::pearson, null_table, alpha)},
      {"dcov-mle",
       tp::critical_value(tp::TestKind::dcov_mle, null_table, alpha)},
      {"dcov-unbiased",
       tp::critical_value(tp::TestKind::dcov_unbiased, null_table, alpha)}};
  return j;
}

int cmd_power(const CommonOpts& opts, bool with_empirical) {
  std::uint64_t seed = resolve_seed(opts);
  int workers = resolve_workers(opts);
  if (opts.n_values.empty())
    throw std::domain_error("at least one --n is required");
  if (with_empirical && opts.replications < 1)
    throw std::domain_error("--replications must be >= 1");
  double epsilon =
      opts.epsilon_text.empty() ? 0.0 : tp::parse_fraction(opts.epsilon_text);
  tp::Scenario scenario = resolve_scenario(opts, epsilon);
  tp::AlternativeSpec alt = tp::AlternativeSpec::from_table(scenario.table);
  if (!with_empirical && alt.is_null())
    throw std::domain_error(
        "power: epsilon 0 (or an independent table) has no fixed-alternative "
        "power; the rejection rate equals alpha");
  auto tests = resolve_tests(opts);
  tp::Method method = resolve_method(opts, seed ^ 0x517cc1b727220a95ull);
  tp::NullMethod null_method = opts.null_method == "mc"
                                   ? tp::NullMethod::monte_carlo
                                   : tp::NullMethod::asymptotic;
  json config = config_json(with_empirical ? "simulate" : "power", opts, seed);

  std::vector<tp::ReportRow> rows;
  for (std::int64_t n : opts.n_values) {
    if (with_empirical) {
      auto reports = tp::empirical_power_all(tests, scenario, n, opts.alpha,
                                             opts.replications, seed,
                                             null_method, workers, method);
      for (auto& rep : reports) rows.push_back({epsilon, std::move(rep)});
    } else {
      for (auto test : tests) {
        tp::PowerReport rep;
        rep.test = test;
        rep.alpha = opts.alpha;
        rep.n = n;
        rep.critical_value =
            tp::critical_value(test, alt.null_table(), opts.alpha, method);
        rep.theoretical_power =
            tp::theoretical_power(test, alt, n, opts.alpha, method);
        rows.push_back({epsilon, std::move(rep)});
      }
    }
  }
  std::string base = with_empirical ? "simulate" : "power";
  if (opts.format == "json")
    emit(tp::reports_to_json(rows, config.dump()), opts.out_dir,
         base + ".json");
  else
    emit(tp::reports_to_csv(rows, "config " + config.dump()), opts.out_dir,
         base + ".csv");
  if (opts.dump_internals)
    emit(internals_json(alt, opts.alpha).dump(2) + "\n", opts.out_dir,
         "internals.json");
  return 0;
}

int cmd_null_law(const CommonOpts& opts) {
  double epsilon =
      opts.epsilon_text.empty() ? 0.0 : tp::parse_fraction(opts.epsilon_text);
  tp::Scenario scenario = resolve_scenario(opts, epsilon);
  if (scenario.table.dependence_magnitude() > 1e-10)
    throw std::domain_error(
        "null-law: the table is dependent; pass epsilon 0 or an independent "
        "table");
  const tp::JointTable& table = scenario.table;
  json j;
  j["config"] = config_json("null-law", opts, resolve_seed(opts));
  int df = (table.rows() - 1) * (table.cols() - 1);
  j["pearson_df"] = df;
  auto weights = tp::nonzero_weights(tp::null_weights_dcov(table));
  j["weights"] = weights;
  j["lemma1_constant"] = tp::lemma1_constant(table);
  // for I or J up to 3 the marginal eigenvalues have printable closed forms
  auto closed_factors = [](const tp::Vector& m) -> std::vector<double> {
    if (m.size() == 2) return {-2.0 * m(0) * m(1)};
    if (m.size() == 3) {
      double pair_sum = m(0) * m(1) + m(0) * m(2) + m(1) * m(2);
      double rad = std::sqrt(std::pow(m(0) * m(1), 2) +
                             std::pow(m(0) * m(2), 2) +
                             std::pow(m(1) * m(2), 2) - m(0) * m(1) * m(2));
      return {-pair_sum - rad, -pair_sum + rad};
    }
    return {};
  };
  auto rows = closed_factors(table.row_marginals());
  auto cols = closed_factors(table.col_marginals());
  if (!rows.empty() && !cols.empty()) {
    std::vector<double> products;
    for (double a : rows)
      for (double b : cols) products.push_back(a * b);
    std::sort(products.begin(), products.end(), std::greater<double>());
    j["closed_form_weights"] = products;
  }
  emit(j.dump(2) + "\n", opts.out_dir, "null_law.json");
  return 0;
}

void reproduce_table(int setting, const CommonOpts& opts, std::uint64_t seed,
                     int workers, json& manifest) {
  std::vector<std::string> eps_texts =
      setting == 1 ? std::vector<std::string>{"1/100", "1/80"}
                   : std::vector<std::string>{"1/20", "1/15"};
  std::vector<std::int64_t> ns =
      opts.n_values.empty() ? std::vector<std::int64_t>{100, 150, 200, 250}
                            : opts.n_values;
  auto kind =
      setting == 1 ? tp::ScenarioKind::setting1 : tp::ScenarioKind::setting2;
  std::vector<tp::TestKind> tests = {tp::TestKind::pearson,
                                     tp::TestKind::dcov_mle,
                                     tp::TestKind::dcov_unbiased};
  std::ostringstream os;
  os << "# config " << manifest["config"].dump() << "\n";
  os << "epsilon,n,pearson_theoretical,pearson_empirical,"
        "dcov_mle_theoretical,dcov_mle_empirical,"
        "dcov_unbiased_theoretical,dcov_unbiased_empirical\n";
  for (const auto& eps_text : eps_texts) {
    double eps = tp::parse_fraction(eps_text);
    tp::Scenario sc = tp::make_scenario(kind, eps);
    for (std::int64_t n : ns) {
      auto reports =
          tp::empirical_power_all(tests, sc, n, opts.alpha, opts.replications,
                                  seed, tp::NullMethod::asymptotic, workers);
      os << eps_text << "," << n;
      for (const auto& rep : reports)
        os << "," << tp::format_double(rep.theoretical_power) << ","
           << tp::format_double(*rep.empirical_power);
      os << "\n";
    }
  }
  std::string name = "table" + std::to_string(setting) + ".csv";
  emit(os.str(), opts.out_dir, name);
  manifest["files"].push_back(name);
}

void reproduce_figure2(const CommonOpts& opts, std::uint64_t seed, int workers,
                       json& manifest) {
  struct Panel {
    int setting;
    std::int64_t n;
  };
  std::vector<Panel> panels;
  if (opts.n_values.empty())
    panels = {{1, 2000}, {1, 3500}, {1, 5000}, {2, 100}, {2, 150}, {2, 200}};
  else
    for (auto n : opts.n_values)
      panels.push_back({opts.setting ? opts.setting : 1, n});
  for (const auto& panel : panels) {
    auto kind = panel.setting == 1 ? tp::ScenarioKind::setting1
                                   : tp::ScenarioKind::setting2;
    double eps = 1.0 / std::sqrt(static_cast<double>(panel.n));
    tp::Scenario sc = tp::make_scenario(kind, eps);
    auto dist = tp::empirical_distribution(tp::TestKind::pearson, sc, panel.n,
                                           tp::StatScale::n_scale,
                                           opts.replications, seed, workers);
    std::string stem = "figure2_s" + std::to_string(panel.setting) + "_n" +
                       std::to_string(panel.n);
    emit(tp::distribution_to_histogram_json(dist, 80,
                                            manifest["config"].dump()),
         opts.out_dir, stem + "_hist.json");
    // reference: the local-alternative noncentral chi-square limit
    const tp::JointTable& table = sc.table;
    tp::Matrix cpat =
        (table.probs() - table.independence_table()) / eps;  // +-1 pattern
    double ncp = 0.0;
    for (int i = 0; i < table.rows(); ++i)
      for (int j = 0; j < table.cols(); ++j)
        ncp += cpat(i, j) * cpat(i, j) /
               (table.row_marginals()(i) * table.col_marginals()(j));
    double df = (table.rows() - 1.0) * (table.cols() - 1.0);
    std::ostringstream curve;
    curve << "# config " << manifest["config"].dump() << "\n";
    curve << "# noncentral chi-square reference df=" << df
          << " ncp=" << tp::format_double(ncp) << "\n";
    curve << "x,pdf,cdf\n";
    double lo = dist.samples.front(), hi = dist.samples.back();
    for (int g = 0; g <= 256; ++g) {
      double x = lo + (hi - lo) * g / 256.0;
      curve << tp::format_double(x) << ","
            << tp::format_double(tp::noncentral_chisq_pdf(x, df, ncp)) << ","
            << tp::format_double(tp::noncentral_chisq_cdf(x, df, ncp)) << "\n";
    }
    emit(curve.str(), opts.out_dir, stem + "_curve.csv");
    manifest["files"].push_back(stem + "_hist.json");
    manifest["files"].push_back(stem + "_curve.csv");
  }
}

void reproduce_figure345(int figure, const CommonOpts& opts,
                         std::uint64_t seed, int workers, json& manifest) {
  tp::TestKind test = figure == 3 ? tp::TestKind::pearson
                                  : (figure == 4 ? tp::TestKind::dcov_unbiased
                                                 : tp::TestKind::dcov_mle);
  std::vector<std::int64_t> ns =
      opts.n_values.empty() ? std::vector<std::int64_t>{200, 1000, 5000}
                            : opts.n_values;
  for (int setting : {1, 2}) {
    double eps = setting == 1 ? 1.0 / 40.0 : 1.0 / 10.0;
    auto kind =
        setting == 1 ? tp::ScenarioKind::setting1 : tp::ScenarioKind::setting2;
    tp::Scenario sc = tp::make_scenario(kind, eps);
    for (std::int64_t n : ns) {
      auto dist = tp::empirical_distribution(test, sc, n,
                                             tp::StatScale::sqrt_n_centered,
                                             opts.replications, seed, workers);
      std::string stem = "figure" + std::to_string(figure) + "_s" +
                         std::to_string(setting) + "_n" + std::to_string(n);
      emit(tp::distribution_to_histogram_json(dist, 80,
                                              manifest["config"].dump()),
           opts.out_dir, stem + "_hist.json");
      // law curves: asymptotic normal parameters plus a large sample of the
      // second-order law (which has no closed-form density)
      auto law =
          tp::make_second_order_law(test, sc.table, static_cast<double>(n));
      auto law_sample = tp::sample(law, 100000, seed ^ 0xABCDEF, workers);
      tp::EmpiricalDistribution law_dist;
      law_dist.statistic = test;
      law_dist.scale = tp::StatScale::sqrt_n_centered;
      std::sort(law_sample.begin(), law_sample.end());
      law_dist.samples = std::move(law_sample);
      law_dist.n = n;
      law_dist.replications = 100000;
      law_dist.seed = seed;
      emit(tp::distribution_to_histogram_json(law_dist, 80,
                                              manifest["config"].dump()),
           opts.out_dir, stem + "_law_hist.json");
      json params{{"asymptotic_sigma", law.sigma},
                  {"law", json::parse(tp::law_to_json(law))}};
      emit(params.dump(2) + "\n", opts.out_dir, stem + "_law.json");
      manifest["files"].push_back(stem + "_hist.json");
      manifest["files"].push_back(stem + "_law_hist.json");
      manifest["files"].push_back(stem + "_law.json");
    }
  }
}

int cmd_reproduce(const std::string& target, const CommonOpts& opts) {
  std::uint64_t seed = resolve_seed(opts);
  int workers = resolve_workers(opts);
  auto start = std::chrono::steady_clock::now();
  json manifest;
  CommonOpts effective = opts;
  if (target == "figure2" && opts.replications == 10000)
    effective.replications = 100000;  // the figure's stated simulation size
  manifest["config"] = config_json("reproduce " + target, effective, seed);
  manifest["files"] = json::array();
  if (target == "table1")
    reproduce_table(1, effective, seed, workers, manifest);
  else if (target == "table2")
    reproduce_table(2, effective, seed, workers, manifest);
  else if (target == "figure2")
    reproduce_figure2(effective, seed, workers, manifest);
  else if (target == "figure3")
    reproduce_figure345(3, effective, seed, workers, manifest);
  else if (target == "figure4")
    reproduce_figure345(4, effective, seed, workers, manifest);
  else if (target == "figure5")
    reproduce_figure345(5, effective, seed, workers, manifest);
  else
    throw std::domain_error("unknown reproduce target: " + target);
  auto elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  manifest["seed"] = seed;
  manifest["replications"] = effective.replications;
  manifest["runtime_seconds"] = elapsed;
  emit(manifest.dump(2) + "\n", effective.out_dir,
       "manifest_" + target + ".json");
  return 0;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool sim_opts) {
  cmd->add_option("--setting", opts.setting, "Scenario (1 or 2)")
      ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--table", opts.table_path,
                  "CSV file with a joint probability table");
  cmd->add_option("--epsilon", opts.epsilon_text,
                  "Perturbation strength; fractions like 1/100 are exact");
  cmd->add_option("--n", opts.n_values, "Sample size (repeatable)");
  cmd->add_option("--alpha", opts.alpha, "Significance level")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  cmd->add_option(
      "--test", opts.test_names,
      "pearson | dcov-mle | dcov-unbiased (repeatable; default all)");
  cmd->add_option("--method", opts.method, "Law evaluation: cf | mc")
      ->check(CLI::IsMember({"cf", "mc"}));
  cmd->add_option("--format", opts.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", opts.out_dir, "Output directory (default stdout)");
  cmd->add_flag("--dump-internals", opts.dump_internals,
                "Also emit covariance, gradients and eigenvalue weights");
  cmd->add_option("--workers", opts.workers,
                  "Worker threads (default: available parallelism)");
  cmd->add_option("--seed", opts.seed,
                  "RNG seed (fallback: TABPOWER_SEED, then a fixed default)");
  if (sim_opts) {
    cmd->add_option("--replications", opts.replications,
                    "Monte Carlo replications");
    cmd->add_option("--null-method", opts.null_method,
                    "Critical values: asymptotic | mc")
        ->check(CLI::IsMember({"asymptotic", "mc"}));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Power analysis for contingency-table independence tests: Pearson's "
      "chi-square and two distance covariance statistics"};
  app.require_subcommand(1);

  CommonOpts power_opts, sim_opts, null_opts, repro_opts;
  CLI::App* power = app.add_subcommand(
      "power", "Theoretical power under a fixed alternative");
  add_common(power, power_opts, false);
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Empirical power with Monte Carlo replications");
  add_common(simulate, sim_opts, true);
  CLI::App* nulllaw = app.add_subcommand(
      "null-law", "Null-law weights, shift and df at an independent table");
  add_common(nulllaw, null_opts, false);
  CLI::App* repro = app.add_subcommand(
      "reproduce", "Reproduce table1|table2|figure2|figure3|figure4|figure5");
  std::string target;
  repro->add_option("target", target, "What to reproduce")->required();
  add_common(repro, repro_opts, true);

  try {
    app.parse(argc, argv);
    if (power->parsed()) return cmd_power(power_opts, false);
    if (simulate->parsed()) return cmd_power(sim_opts, true);
    if (nulllaw->parsed()) return cmd_null_law(null_opts);
    if (repro->parsed()) return cmd_reproduce(target, repro_opts);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const tp::accuracy_error& e) {
    std::cerr << "accuracy error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
