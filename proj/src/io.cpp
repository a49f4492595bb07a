#include "tabpower/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tabpower {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string matrix_csv(const Matrix& m) {
  std::ostringstream os;
  os << "# " << m.rows() << " x " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ",";
      os << format_double(m(i, j));
    }
    os << "\n";
  }
  return os.str();
}

std::vector<std::vector<double>> parse_csv_rows(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::domain_error("csv: cannot parse cell '" + cell + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::domain_error("csv: no data rows");
  for (const auto& r : rows)
    if (r.size() != rows[0].size())
      throw std::domain_error("csv: ragged rows");
  return rows;
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return m;
}

json cells_json(const Matrix& m) {
  json cells = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    cells.push_back(std::move(row));
  }
  return cells;
}

Matrix cells_from_json(const json& j) {
  int I = j.at("I").get<int>();
  int J = j.at("J").get<int>();
  const json& cells = j.at("cells");
  if (static_cast<int>(cells.size()) != I)
    throw std::domain_error("json table: row count mismatch");
  Matrix m(I, J);
  for (int i = 0; i < I; ++i) {
    if (static_cast<int>(cells[i].size()) != J)
      throw std::domain_error("json table: column count mismatch");
    for (int jj = 0; jj < J; ++jj) m(i, jj) = cells[i][jj].get<double>();
  }
  return m;
}

}  // namespace

std::string table_to_csv(const JointTable& table) {
  return matrix_csv(table.probs());
}

std::string table_to_csv(const CountTable& table) {
  std::ostringstream os;
  os << "# " << table.rows() << " x " << table.cols() << "\n";
  for (int i = 0; i < table.rows(); ++i) {
    for (int j = 0; j < table.cols(); ++j) {
      if (j) os << ",";
      os << table.counts()(i, j);
    }
    os << "\n";
  }
  return os.str();
}

JointTable joint_table_from_csv(std::istream& in) {
  return JointTable::from_probs(rows_to_matrix(parse_csv_rows(in)));
}

CountTable count_table_from_csv(std::istream& in) {
  Matrix m = rows_to_matrix(parse_csv_rows(in));
  CountMatrix counts(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v = m(i, j);
      if (v < 0 || v != std::floor(v))
        throw std::domain_error("count csv: entries must be nonnegative integers");
      counts(i, j) = static_cast<std::int64_t>(v);
    }
  return CountTable::from_counts(std::move(counts));
}

JointTable joint_table_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("cannot open table file: " + path);
  return joint_table_from_csv(in);
}

std::string table_to_json(const JointTable& table) {
  json j{{"I", table.rows()}, {"J", table.cols()},
         {"cells", cells_json(table.probs())}};
  return j.dump();
}

std::string table_to_json(const CountTable& table) {
  json j{{"I", table.rows()},
         {"J", table.cols()},
         {"cells", cells_json(table.counts().cast<double>())}};
  return j.dump();
}

JointTable joint_table_from_json(const std::string& text) {
  return JointTable::from_probs(cells_from_json(json::parse(text)));
}

CountTable count_table_from_json(const std::string& text) {
  Matrix m = cells_from_json(json::parse(text));
  CountMatrix counts(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      counts(i, j) = static_cast<std::int64_t>(m(i, j));
  return CountTable::from_counts(std::move(counts));
}

std::string law_to_json(const SecondOrderLaw& law) {
  json j{{"sigma", law.sigma},
         {"weights", law.weights},
         {"shift", law.shift},
         {"n", law.n}};
  return j.dump();
}

SecondOrderLaw second_order_law_from_json(const std::string& text) {
  json j = json::parse(text);
  SecondOrderLaw law;
  law.sigma = j.at("sigma").get<double>();
  law.weights = j.at("weights").get<std::vector<double>>();
  law.shift = j.at("shift").get<double>();
  law.n = j.at("n").get<double>();
  return law;
}

std::string law_to_json(const NullLaw& law) {
  json j{{"kind", law.kind == NullLaw::Kind::chi_square ? "chi_square"
                                                        : "weighted_centered"},
         {"df", law.df},
         {"weights", law.weights},
         {"shift", law.shift}};
  return j.dump();
}

NullLaw null_law_from_json(const std::string& text) {
  json j = json::parse(text);
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "chi_square") return NullLaw::chi_square(j.at("df").get<double>());
  return NullLaw::weighted_centered(j.at("weights").get<std::vector<double>>(),
                                    j.at("shift").get<double>());
}

double parse_fraction(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size())
      throw std::domain_error("cannot parse number: '" + text + "'");
    return v;
  }
  std::string num = text.substr(0, slash);
  std::string den = text.substr(slash + 1);
  std::size_t un = 0, ud = 0;
  long long a = std::stoll(num, &un);
  long long b = std::stoll(den, &ud);
  if (un != num.size() || ud != den.size() || b == 0)
    throw std::domain_error("cannot parse fraction: '" + text + "'");
  return static_cast<double>(a) / static_cast<double>(b);
}

std::string reports_to_csv(const std::vector<ReportRow>& rows,
                           const std::string& header_comment) {
  std::ostringstream os;
  std::istringstream hc(header_comment);
  std::string line;
  while (std::getline(hc, line)) os << "# " << line << "\n";
  os << "epsilon,n,test,critical_value,theoretical,empirical,stderr,"
        "zero_marginal_replicates\n";
  for (const auto& row : rows) {
    const PowerReport& r = row.report;
    os << format_double(row.epsilon) << "," << r.n << "," << test_name(r.test)
       << "," << format_double(r.critical_value) << ","
       << format_double(r.theoretical_power) << ",";
    if (r.empirical_power) os << format_double(*r.empirical_power);
    os << ",";
    if (r.mc_stderr) os << format_double(*r.mc_stderr);
    os << "," << r.replicates_rejected_for_zero_marginals << "\n";
  }
  return os.str();
}

std::string reports_to_json(const std::vector<ReportRow>& rows,
                            const std::string& config_json) {
  json out;
  out["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  json jrows = json::array();
  for (const auto& row : rows) {
    const PowerReport& r = row.report;
    json jr{{"epsilon", row.epsilon},
            {"n", r.n},
            {"test", test_name(r.test)},
            {"alpha", r.alpha},
            {"critical_value", r.critical_value},
            {"theoretical", r.theoretical_power},
            {"zero_marginal_replicates",
             r.replicates_rejected_for_zero_marginals}};
    if (r.empirical_power) jr["empirical"] = *r.empirical_power;
    if (r.mc_stderr) jr["stderr"] = *r.mc_stderr;
    jrows.push_back(std::move(jr));
  }
  out["rows"] = std::move(jrows);
  return out.dump(2);
}

std::string distribution_to_csv(const EmpiricalDistribution& dist,
                                const std::string& header_comment) {
  std::ostringstream os;
  std::istringstream hc(header_comment);
  std::string line;
  while (std::getline(hc, line)) os << "# " << line << "\n";
  os << "# statistic=" << test_name(dist.statistic) << " scale="
     << (dist.scale == StatScale::n_scale ? "n" : "sqrt_n_centered")
     << " n=" << dist.n << " replications=" << dist.replications
     << " rejected=" << dist.rejected << " seed=" << dist.seed << "\n";
  for (double v : dist.samples) os << format_double(v) << "\n";
  return os.str();
}

std::string distribution_to_histogram_json(const EmpiricalDistribution& dist,
                                           int bins,
                                           const std::string& config_json) {
  if (bins < 1) throw std::domain_error("histogram: bins must be >= 1");
  if (dist.samples.empty()) throw std::domain_error("histogram: no samples");
  double lo = dist.samples.front(), hi = dist.samples.back();
  if (hi <= lo) hi = lo + 1.0;
  double width = (hi - lo) / bins;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : dist.samples) {
    auto b = static_cast<std::int64_t>((v - lo) / width);
    b = std::clamp<std::int64_t>(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  json j;
  j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  j["statistic"] = test_name(dist.statistic);
  j["scale"] = dist.scale == StatScale::n_scale ? "n" : "sqrt_n_centered";
  j["n"] = dist.n;
  j["replications"] = dist.replications;
  j["rejected"] = dist.rejected;
  j["seed"] = dist.seed;
  j["bin_start"] = lo;
  j["bin_width"] = width;
  j["counts"] = counts;
  return j.dump(2);
}

}  // namespace tabpower
