#include "tabpower/delta.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tabpower/stats.hpp"

namespace tabpower {

Vector vec_star(const Matrix& m) {
  if (m.rows() < 2 || m.cols() < 2)
    throw std::domain_error("vec_star: dimensions must be at least 2x2");
  const Eigen::Index total = m.size();
  Vector v(total - 1);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i == m.rows() - 1 && j == m.cols() - 1) continue;
      v(k++) = m(i, j);
    }
  return v;
}

Matrix embed_vec_star(const Vector& v, double last, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols - 1)
    throw std::domain_error("embed_vec_star: length mismatch");
  Matrix m(rows, cols);
  Eigen::Index k = 0;
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      if (i == rows - 1 && j == cols - 1)
        m(i, j) = last;
      else
        m(i, j) = v(k++);
    }
  return m;
}

Matrix sigma_star(const JointTable& table) {
  if (table.probs().maxCoeff() >= 1.0)
    throw std::domain_error("sigma_star: a cell probability of 1 is degenerate");
  Vector v = vec_star(table.probs());
  Matrix s = -v * v.transpose();
  s.diagonal() = v.array() * (1.0 - v.array());
  return s;
}

namespace {

void require_positive_marginals(const AlternativeSpec& alt) {
  if (alt.row_marginals().minCoeff() <= 0.0 ||
      alt.col_marginals().minCoeff() <= 0.0)
    throw std::domain_error("gradient: zero marginal");
}

}  // namespace

Matrix grad_pearson(const AlternativeSpec& alt) {
  require_positive_marginals(alt);
  const Matrix& c = alt.c();
  const Vector& r = alt.row_marginals();
  const Vector& s = alt.col_marginals();
  const int I = alt.rows(), J = alt.cols();
  // Per-row and per-column aggregates of c^2 / (marginal products).
  Vector rowsum(I), colsum(J);
  for (int i = 0; i < I; ++i) {
    double acc = 0.0;
    for (int k = 0; k < J; ++k) acc += c(i, k) * c(i, k) / (r(i) * r(i) * s(k));
    rowsum(i) = acc;
  }
  for (int j = 0; j < J; ++j) {
    double acc = 0.0;
    for (int m = 0; m < I; ++m) acc += c(m, j) * c(m, j) / (r(m) * s(j) * s(j));
    colsum(j) = acc;
  }
  const double corner = 2.0 * c(I - 1, J - 1) / (r(I - 1) * s(J - 1));
  Matrix g = Matrix::Zero(I, J);
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j) {
      if (i == I - 1 && j == J - 1) continue;
      double val = 2.0 * c(i, j) / (r(i) * s(j)) - corner;
      if (i != I - 1) val += rowsum(I - 1) - rowsum(i);
      if (j != J - 1) val += colsum(J - 1) - colsum(j);
      g(i, j) = val;
    }
  return g;
}

Matrix grad_dcov(const AlternativeSpec& alt) {
  require_positive_marginals(alt);
  const Matrix& c = alt.c();
  const Vector& r = alt.row_marginals();
  const Vector& s = alt.col_marginals();
  const int I = alt.rows(), J = alt.cols();
  // rw(i) = sum_k s_k c_ik, cw(j) = sum_m r_m c_mj
  Vector rw = c * s;
  Vector cw = c.transpose() * r;
  const double corner = 2.0 * c(I - 1, J - 1);
  Matrix g = Matrix::Zero(I, J);
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j) {
      if (i == I - 1 && j == J - 1) continue;
      double val = 2.0 * c(i, j) - corner;
      if (i != I - 1) val += 2.0 * (rw(I - 1) - rw(i));
      if (j != J - 1) val += 2.0 * (cw(J - 1) - cw(j));
      g(i, j) = val;
    }
  return g;
}

namespace {

// Finest central-difference step; the Richardson table is built from the
// decreasing sequence 4h, 2h, h. Starting the extrapolation two levels
// above the finest step keeps the cancellation noise of the second
// differences near the 1e-9 level.
constexpr double kHessianStep = 1e-4;

class LeaveOneOutEval {
 public:
  LeaveOneOutEval(const std::function<double(const Matrix&)>& f,
                  const JointTable& table)
      : f_(f),
        rows_(table.rows()),
        cols_(table.cols()),
        base_(vec_star(table.probs())) {}

  double at(const Vector& v) const {
    return f_(embed_vec_star(v, 1.0 - v.sum(), rows_, cols_));
  }
  const Vector& base() const { return base_; }

 private:
  const std::function<double(const Matrix&)>& f_;
  int rows_, cols_;
  Vector base_;
};

// Two Richardson refinement levels on a central difference: 4h, 2h, h.
double richardson(const std::function<double(double)>& d2, double h) {
  double a0 = d2(4.0 * h);
  double a1 = d2(2.0 * h);
  double a2 = d2(h);
  double b0 = (4.0 * a1 - a0) / 3.0;
  double b1 = (4.0 * a2 - a1) / 3.0;
  return (16.0 * b1 - b0) / 15.0;
}

}  // namespace

Matrix numeric_hessian(const std::function<double(const Matrix&)>& f,
                       const JointTable& table) {
  // All free cells and the eliminated corner must have room for the full
  // four-point stencil at the coarsest step.
  const double reach = 2.5 * 4.0 * kHessianStep;
  for (int i = 0; i < table.rows(); ++i)
    for (int j = 0; j < table.cols(); ++j)
      if (table(i, j) <= reach) {
        std::ostringstream os;
        os << "numeric_hessian: cell (" << i + 1 << "," << j + 1
           << ") = " << table(i, j) << " is within the difference step";
        throw std::domain_error(os.str());
      }
  LeaveOneOutEval eval(f, table);
  const Vector& v0 = eval.base();
  const auto m = v0.size();
  const double f0 = eval.at(v0);
  Matrix h = Matrix::Zero(m, m);
  Vector v = v0;
  for (Eigen::Index k = 0; k < m; ++k) {
    h(k, k) = richardson(
        [&](double step) {
          v = v0;
          v(k) = v0(k) + step;
          double fp = eval.at(v);
          v(k) = v0(k) - step;
          double fm = eval.at(v);
          return (fp - 2.0 * f0 + fm) / (step * step);
        },
        kHessianStep);
    for (Eigen::Index l = 0; l < k; ++l) {
      double val = richardson(
          [&](double step) {
            v = v0;
            v(k) = v0(k) + step; v(l) = v0(l) + step;
            double fpp = eval.at(v);
            v(l) = v0(l) - step;
            double fpm = eval.at(v);
            v(k) = v0(k) - step; v(l) = v0(l) + step;
            double fmp = eval.at(v);
            v(l) = v0(l) - step;
            double fmm = eval.at(v);
            return (fpp - fpm - fmp + fmm) / (4.0 * step * step);
          },
          kHessianStep);
      h(k, l) = h(l, k) = val;
    }
  }
  return 0.5 * (h + h.transpose());
}

Matrix numeric_hessian(Functional f, const JointTable& table) {
  std::function<double(const Matrix&)> fn;
  if (f == Functional::pearson)
    fn = [](const Matrix& p) { return pearson_functional_raw(p); };
  else
    fn = [](const Matrix& p) { return dcov_functional_raw(p); };
  return numeric_hessian(fn, table);
}

double asymptotic_variance(const Matrix& grad, const Matrix& sigma) {
  Vector v = vec_star(grad);
  if (v.size() != sigma.rows() || sigma.rows() != sigma.cols())
    throw std::invalid_argument("asymptotic_variance: dimension mismatch");
  double out = v.dot(sigma * v);
  return out < 0.0 ? 0.0 : out;
}

Matrix sym_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_sqrt: eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < 1e-12)
    throw std::domain_error(
        "sym_sqrt: matrix is not positive definite (degenerate table?)");
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

namespace {

void sort_weights(std::vector<double>& w) {
  std::sort(w.begin(), w.end(), [](double a, double b) {
    double fa = std::fabs(a), fb = std::fabs(b);
    if (fa != fb) return fa > fb;
    return a > b;
  });
}

}  // namespace

std::vector<double> second_order_weights(const Matrix& sigma,
                                         const Matrix& hessian) {
  if (sigma.rows() != hessian.rows() || sigma.cols() != hessian.cols())
    throw std::invalid_argument("second_order_weights: dimension mismatch");
  Matrix root = sym_sqrt(sigma);
  Matrix sandwich = root * hessian * root;
  sandwich = 0.5 * (sandwich + sandwich.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sandwich);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("second_order_weights: eigensolver failed");
  std::vector<double> w(es.eigenvalues().data(),
                        es.eigenvalues().data() + es.eigenvalues().size());
  sort_weights(w);
  return w;
}

std::vector<double> null_weights_dcov(const JointTable& table) {
  if (table.dependence_magnitude() > 1e-10)
    throw std::domain_error(
        "null_weights_dcov: table is not a product of its marginals");
  std::vector<double> w = second_order_weights(
      sigma_star(table), numeric_hessian(Functional::dcov, table));
  for (double& x : w) x *= 0.5;
  return w;
}

std::vector<double> nonzero_weights(const std::vector<double>& w, double tol) {
  std::vector<double> out;
  for (double x : w)
    if (std::fabs(x) > tol) out.push_back(x);
  return out;
}

}  // namespace tabpower
