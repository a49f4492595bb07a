#include <doctest.h>

#include <sstream>

#include "tabpower/io.hpp"
#include "tabpower/rng.hpp"
#include "tabpower/sim.hpp"

using namespace tabpower;

TEST_CASE("joint table CSV round trip is exact") {
  RngStream rng(3, 3);
  Matrix p(3, 4);
  double total = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) total += (p(i, j) = rng.uniform());
  p /= total;
  p(2, 3) += 1.0 - p.sum();  // exact renormalization
  auto table = JointTable::from_probs(p);
  std::istringstream in(table_to_csv(table));
  auto back = joint_table_from_csv(in);
  CHECK((back.probs() - table.probs()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("count table CSV round trip") {
  CountMatrix m(2, 3);
  m << 3, 0, 7, 2, 9, 4;
  auto t = CountTable::from_counts(m);
  std::istringstream in(table_to_csv(t));
  auto back = count_table_from_csv(in);
  CHECK(back.counts() == t.counts());
  CHECK(back.n() == 25);

  std::istringstream bad("1,2\n3,-4\n");
  CHECK_THROWS_AS(count_table_from_csv(bad), std::domain_error);
  std::istringstream frac("1.5,2\n3,4\n");
  CHECK_THROWS_AS(count_table_from_csv(frac), std::domain_error);
}

TEST_CASE("table JSON round trip") {
  auto table = scenario_table(ScenarioKind::setting2, 0.1);
  auto back = joint_table_from_json(table_to_json(table));
  CHECK((back.probs() - table.probs()).cwiseAbs().maxCoeff() == 0.0);

  CountMatrix m(2, 2);
  m << 3, 1, 1, 3;
  auto counts = CountTable::from_counts(m);
  auto cback = count_table_from_json(table_to_json(counts));
  CHECK(cback.counts() == counts.counts());
}

TEST_CASE("fraction parsing") {
  CHECK(parse_fraction("1/100") == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(parse_fraction("1/36") == doctest::Approx(1.0 / 36.0).epsilon(1e-16));
  CHECK(parse_fraction("-3/8") == doctest::Approx(-0.375).epsilon(1e-16));
  CHECK(parse_fraction("0.025") == doctest::Approx(0.025).epsilon(1e-16));
  CHECK(parse_fraction("0") == 0.0);
  CHECK_THROWS_AS(parse_fraction("1/0"), std::domain_error);
  CHECK_THROWS_AS(parse_fraction("x/2"), std::exception);
  CHECK_THROWS_AS(parse_fraction("1.2.3"), std::exception);
}

TEST_CASE("report CSV embeds the config header and all columns") {
  PowerReport rep;
  rep.test = TestKind::dcov_unbiased;
  rep.alpha = 0.05;
  rep.n = 100;
  rep.critical_value = 1.25;
  rep.theoretical_power = 0.743;
  rep.empirical_power = 0.74;
  rep.mc_stderr = 0.004;
  std::string csv = reports_to_csv({{0.05, rep}}, "cmd=simulate seed=42");
  CHECK(csv.find("# cmd=simulate seed=42") != std::string::npos);
  CHECK(csv.find("epsilon,n,test,critical_value,theoretical,empirical,")
        != std::string::npos);
  CHECK(csv.find("dcov-unbiased") != std::string::npos);
  CHECK(csv.find("0.74") != std::string::npos);
}

TEST_CASE("report JSON carries config and rows") {
  PowerReport rep;
  rep.test = TestKind::pearson;
  rep.n = 200;
  rep.theoretical_power = 0.81;
  std::string js = reports_to_json({{0.1, rep}}, R"({"command":"power"})");
  CHECK(js.find("\"command\": \"power\"") != std::string::npos);
  CHECK(js.find("\"pearson\"") != std::string::npos);
}

TEST_CASE("distribution exports") {
  EmpiricalDistribution dist;
  dist.statistic = TestKind::pearson;
  dist.scale = StatScale::n_scale;
  dist.samples = {1.0, 2.0, 2.5, 3.0};
  dist.n = 100;
  dist.replications = 4;
  dist.seed = 9;
  std::string csv = distribution_to_csv(dist, "run");
  CHECK(csv.find("# run") != std::string::npos);
  CHECK(csv.find("statistic=pearson") != std::string::npos);
  std::string hist = distribution_to_histogram_json(dist, 2, "{}");
  CHECK(hist.find("\"counts\"") != std::string::npos);
}
