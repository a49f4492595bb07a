#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace tabpower {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Joint distribution of an I x J contingency table: cell probabilities plus
// derived marginals. Cells must be nonnegative and sum to 1 within 1e-12.
// Zero marginals are representable (they arise from empirical tables); the
// operations that divide by marginals reject such tables instead.
class JointTable {
 public:
  static JointTable from_probs(Matrix probs);

  int rows() const { return static_cast<int>(probs_.rows()); }
  int cols() const { return static_cast<int>(probs_.cols()); }
  const Matrix& probs() const { return probs_; }
  const Vector& row_marginals() const { return row_; }
  const Vector& col_marginals() const { return col_; }
  double operator()(int i, int j) const { return probs_(i, j); }

  bool has_positive_marginals() const {
    return row_.minCoeff() > 0.0 && col_.minCoeff() > 0.0;
  }
  // Product of the marginals; the independent table this one is compared to.
  Matrix independence_table() const { return row_ * col_.transpose(); }
  // Max absolute deviation from the product of marginals.
  double dependence_magnitude() const {
    return (probs_ - independence_table()).cwiseAbs().maxCoeff();
  }

 private:
  JointTable(Matrix probs, Vector row, Vector col)
      : probs_(std::move(probs)), row_(std::move(row)), col_(std::move(col)) {}
  Matrix probs_;
  Vector row_, col_;
};

// Observed counts with total n >= 1.
class CountTable {
 public:
  static CountTable from_counts(CountMatrix counts);

  int rows() const { return static_cast<int>(counts_.rows()); }
  int cols() const { return static_cast<int>(counts_.cols()); }
  const CountMatrix& counts() const { return counts_; }
  std::int64_t n() const { return n_; }

 private:
  CountTable(CountMatrix counts, std::int64_t n)
      : counts_(std::move(counts)), n_(n) {}
  CountMatrix counts_;
  std::int64_t n_;
};

// A joint table decomposed as pi_ij = row_i * col_j + c_ij. The perturbation
// c has zero row sums and zero column sums, so the induced table keeps the
// stored marginals exactly.
class AlternativeSpec {
 public:
  static AlternativeSpec from_parts(Vector row_marginals, Vector col_marginals,
                                    Matrix c);
  static AlternativeSpec from_table(const JointTable& table);

  const Vector& row_marginals() const { return row_; }
  const Vector& col_marginals() const { return col_; }
  const Matrix& c() const { return c_; }
  int rows() const { return static_cast<int>(c_.rows()); }
  int cols() const { return static_cast<int>(c_.cols()); }
  // Perturbations at the rounding noise of the decomposition itself count
  // as the null.
  bool is_null() const { return c_.cwiseAbs().maxCoeff() <= 1e-15; }

  JointTable induced_table() const;
  JointTable null_table() const;  // outer product of the marginals

 private:
  AlternativeSpec(Vector row, Vector col, Matrix c)
      : row_(std::move(row)), col_(std::move(col)), c_(std::move(c)) {}
  Vector row_, col_;
  Matrix c_;
};

JointTable mle_table(const CountTable& counts);

}  // namespace tabpower
