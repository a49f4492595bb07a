#include "tabpower/stats.hpp"

#include <stdexcept>

namespace tabpower {

double pearson_functional_raw(const Matrix& probs) {
  Vector row = probs.rowwise().sum();
  Vector col = probs.colwise().sum();
  if (row.minCoeff() <= 0.0 || col.minCoeff() <= 0.0)
    throw std::domain_error("pearson functional: zero marginal");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i)
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      double e = row(i) * col(j);
      double d = probs(i, j) - e;
      acc += d * d / e;
    }
  return acc;
}

double dcov_functional_raw(const Matrix& probs) {
  Vector row = probs.rowwise().sum();
  Vector col = probs.colwise().sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i)
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      double d = probs(i, j) - row(i) * col(j);
      acc += d * d;
    }
  return acc;
}

double pearson_functional(const JointTable& table) {
  return pearson_functional_raw(table.probs());
}

double dcov_functional(const JointTable& table) {
  return dcov_functional_raw(table.probs());
}

double stat_pearson(const CountTable& counts) {
  return pearson_functional_raw(counts.counts().cast<double>() /
                                static_cast<double>(counts.n()));
}

double stat_dcov_mle(const CountTable& counts) {
  return dcov_functional_raw(counts.counts().cast<double>() /
                             static_cast<double>(counts.n()));
}

double dcov_unbiased_at(const JointTable& table, double n) {
  if (n < 4.0)
    throw std::domain_error("dcov_unbiased: requires n >= 4");
  const Matrix& p = table.probs();
  const Vector& row = table.row_marginals();
  const Vector& col = table.col_marginals();
  double s_dev2 = 0.0;   // sum (p_ij - r_i c_j)^2
  double s_cross = 0.0;  // sum p_ij r_i c_j
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      double e = row(i) * col(j);
      double d = p(i, j) - e;
      s_dev2 += d * d;
      s_cross += p(i, j) * e;
    }
  double sr = row.squaredNorm();
  double sc = col.squaredNorm();
  return n / (n - 3.0) * s_dev2
       - 4.0 * n / ((n - 2.0) * (n - 3.0)) * s_cross
       + n / ((n - 1.0) * (n - 3.0)) * (sr + sc)
       + n * (3.0 * n - 2.0) / ((n - 1.0) * (n - 2.0) * (n - 3.0)) * sr * sc
       - n / ((n - 1.0) * (n - 3.0));
}

double stat_dcov_unbiased(const CountTable& counts) {
  return dcov_unbiased_at(mle_table(counts),
                          static_cast<double>(counts.n()));
}

double lemma1_constant(const JointTable& table) {
  const Matrix& p = table.probs();
  const Vector& row = table.row_marginals();
  const Vector& col = table.col_marginals();
  double sr = row.squaredNorm();
  double sc = col.squaredNorm();
  double s_cross = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      s_cross += p(i, j) * row(i) * col(j);
  return 1.0 - sr - sc - 3.0 * sr * sc + 4.0 * s_cross -
         3.0 * dcov_functional(table);
}

}  // namespace tabpower
