#include "tabpower/table.hpp"

#include <sstream>
#include <stdexcept>

namespace tabpower {

namespace {
constexpr double kProbTol = 1e-12;      // tolerance on probability sums
constexpr double kMarginalTol = 1e-10;  // tolerance on c row/column sums
}  // namespace

JointTable JointTable::from_probs(Matrix probs) {
  if (probs.rows() < 2 || probs.cols() < 2)
    throw std::domain_error("JointTable: dimensions must be at least 2x2");
  if ((probs.array() < 0.0).any())
    throw std::domain_error("JointTable: negative cell probability");
  double total = probs.sum();
  if (std::abs(total - 1.0) > kProbTol) {
    std::ostringstream os;
    os << "JointTable: probabilities sum to " << total << ", not 1";
    throw std::domain_error(os.str());
  }
  Vector row = probs.rowwise().sum();
  Vector col = probs.colwise().sum();
  return JointTable(std::move(probs), std::move(row), std::move(col));
}

CountTable CountTable::from_counts(CountMatrix counts) {
  if (counts.rows() < 2 || counts.cols() < 2)
    throw std::domain_error("CountTable: dimensions must be at least 2x2");
  if ((counts.array() < 0).any())
    throw std::domain_error("CountTable: negative count");
  std::int64_t n = counts.sum();
  if (n < 1) throw std::domain_error("CountTable: total count must be >= 1");
  return CountTable(std::move(counts), n);
}

AlternativeSpec AlternativeSpec::from_parts(Vector row_marginals,
                                            Vector col_marginals, Matrix c) {
  const auto I = row_marginals.size();
  const auto J = col_marginals.size();
  if (c.rows() != I || c.cols() != J)
    throw std::domain_error("AlternativeSpec: dimension mismatch");
  if (std::abs(row_marginals.sum() - 1.0) > kProbTol ||
      std::abs(col_marginals.sum() - 1.0) > kProbTol)
    throw std::domain_error("AlternativeSpec: marginals must each sum to 1");
  if (row_marginals.minCoeff() <= 0.0 || col_marginals.minCoeff() <= 0.0)
    throw std::domain_error("AlternativeSpec: marginals must be positive");
  if (std::abs(c.sum()) > kProbTol)
    throw std::domain_error("AlternativeSpec: perturbation must sum to 0");
  // The decomposition with these exact marginals forces every row and
  // column of c to sum to zero, not just the grand total.
  for (Eigen::Index i = 0; i < I; ++i)
    if (std::abs(c.row(i).sum()) > kMarginalTol)
      throw std::domain_error("AlternativeSpec: row sum of c is not 0");
  for (Eigen::Index j = 0; j < J; ++j)
    if (std::abs(c.col(j).sum()) > kMarginalTol)
      throw std::domain_error("AlternativeSpec: column sum of c is not 0");
  Matrix induced = row_marginals * col_marginals.transpose() + c;
  if ((induced.array() < 0.0).any())
    throw std::domain_error(
        "AlternativeSpec: induced table has a negative cell");
  return AlternativeSpec(std::move(row_marginals), std::move(col_marginals),
                         std::move(c));
}

AlternativeSpec AlternativeSpec::from_table(const JointTable& table) {
  if (!table.has_positive_marginals())
    throw std::domain_error("AlternativeSpec: table has a zero marginal");
  Matrix c = table.probs() - table.independence_table();
  return from_parts(table.row_marginals(), table.col_marginals(), std::move(c));
}

JointTable AlternativeSpec::induced_table() const {
  return JointTable::from_probs(row_ * col_.transpose() + c_);
}

JointTable AlternativeSpec::null_table() const {
  return JointTable::from_probs(row_ * col_.transpose());
}

JointTable mle_table(const CountTable& counts) {
  Matrix probs =
      counts.counts().cast<double>() / static_cast<double>(counts.n());
  return JointTable::from_probs(std::move(probs));
}

}  // namespace tabpower
