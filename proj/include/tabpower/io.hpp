#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tabpower/laws.hpp"
#include "tabpower/power.hpp"
#include "tabpower/sim.hpp"
#include "tabpower/table.hpp"

namespace tabpower {

// Table serialization. CSV is row-major, one table row per line, with an
// optional "# I x J" comment header; probabilities are written with 17
// significant digits so round trips are exact.
std::string table_to_csv(const JointTable& table);
std::string table_to_csv(const CountTable& table);
JointTable joint_table_from_csv(std::istream& in);
CountTable count_table_from_csv(std::istream& in);
JointTable joint_table_from_csv_file(const std::string& path);

std::string table_to_json(const JointTable& table);
std::string table_to_json(const CountTable& table);
JointTable joint_table_from_json(const std::string& text);
CountTable count_table_from_json(const std::string& text);

std::string law_to_json(const SecondOrderLaw& law);
SecondOrderLaw second_order_law_from_json(const std::string& text);
std::string law_to_json(const NullLaw& law);
NullLaw null_law_from_json(const std::string& text);

// "1/100" (exact integer fraction) or a plain decimal.
double parse_fraction(const std::string& text);

// Deterministic short formatting used in all emitted artifacts.
std::string format_double(double v);

struct ReportRow {
  double epsilon = 0.0;
  PowerReport report;
};

// Long-format rows: epsilon,n,test,critical_value,theoretical,empirical,stderr,
// zero_marginal_replicates. The header_comment lines (resolved run config)
// are embedded as leading '#' lines.
std::string reports_to_csv(const std::vector<ReportRow>& rows,
                           const std::string& header_comment);
std::string reports_to_json(const std::vector<ReportRow>& rows,
                            const std::string& config_json);

std::string distribution_to_csv(const EmpiricalDistribution& dist,
                                const std::string& header_comment);
// Equal-width binned histogram with the sample count per bin.
std::string distribution_to_histogram_json(const EmpiricalDistribution& dist,
                                           int bins,
                                           const std::string& config_json);

}  // namespace tabpower
