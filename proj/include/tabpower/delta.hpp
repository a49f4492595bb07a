#pragma once

#include <functional>
#include <vector>

#include "tabpower/table.hpp"

namespace tabpower {

enum class Functional { pearson, dcov };

// Leave-one-out vectorization: stack columns, drop the (I,J) entry. With
// the last cell removed the multinomial covariance below is nonsingular.
Vector vec_star(const Matrix& m);
// Inverse embedding: rebuild the full matrix, last entry supplied (for
// probability vectors, 1 - sum of the others).
Matrix embed_vec_star(const Vector& v, double last, int rows, int cols);

// Covariance of the vectorized scaled cell-proportion estimates:
// diagonal pi(1-pi), off-diagonal -pi_k pi_l. Positive definite whenever
// every cell is strictly positive.
Matrix sigma_star(const JointTable& table);

// Closed-form first-order partial derivatives of the two functionals under
// the leave-one-out parametrization, evaluated at the decomposed table.
// Entry (I,J) is fixed at 0. Both vanish identically when c == 0.
Matrix grad_pearson(const AlternativeSpec& alt);
Matrix grad_dcov(const AlternativeSpec& alt);

// Hessian of a functional of the free cells (marginals recomputed, last
// cell eliminated): central differences with two Richardson refinement
// levels, initial step 1e-4. Result is symmetrized.
Matrix numeric_hessian(const std::function<double(const Matrix&)>& f,
                       const JointTable& table);
Matrix numeric_hessian(Functional f, const JointTable& table);

double asymptotic_variance(const Matrix& grad, const Matrix& sigma);

// Symmetric square root via eigendecomposition; rejects matrices whose
// smallest eigenvalue is below 1e-12.
Matrix sym_sqrt(const Matrix& s);

// Eigenvalues of sqrt(S) H sqrt(S), sorted descending by absolute value
// (ties broken by signed value, descending).
std::vector<double> second_order_weights(const Matrix& sigma,
                                         const Matrix& hessian);

// Weights of the degenerate null law of the distance covariance statistics:
// half the eigenvalues of the sandwich with the dcov Hessian, evaluated at
// an exactly independent table. Exactly (I-1)(J-1) of them are nonzero.
std::vector<double> null_weights_dcov(const JointTable& table);

// Drops entries below the given magnitude (the structurally zero part of
// the null spectrum).
std::vector<double> nonzero_weights(const std::vector<double>& w,
                                    double tol = 1e-9);

}  // namespace tabpower
