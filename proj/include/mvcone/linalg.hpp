/**
 * @file linalg.hpp
 * @brief Dense vector/matrix aliases and the few factorizations the solvers share
 */

#pragma once

#include <Eigen/Dense>

namespace mvcone {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Moore–Penrose pseudoinverse via SVD; singular values below
/// rel_tol * sigma_max are treated as zero.
Matrix pseudoinverse(const Matrix& a, double rel_tol = 1e-12);

/// Least-norm solution of a * x = b for symmetric PSD a. Uses an LDLT solve
/// when a is numerically positive definite (exact for 1x1 systems) and the
/// pseudoinverse otherwise.
Vector solve_psd(const Matrix& a, const Vector& b, double rel_tol = 1e-12);

}  // namespace mvcone
