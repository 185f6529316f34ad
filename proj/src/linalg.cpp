#include "mvcone/linalg.hpp"

#include <algorithm>

namespace mvcone {

Matrix pseudoinverse(const Matrix& a, double rel_tol) {
    if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double cutoff = rel_tol * (s.size() > 0 ? s(0) : 0.0);
    Vector inv = Vector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Vector solve_psd(const Matrix& a, const Vector& b, double rel_tol) {
    if (a.rows() == 0) return Vector::Zero(0);
    if (a.rows() == 1) {
        const double d = a(0, 0);
        Vector x(1);
        x(0) = d > 0.0 ? b(0) / d : 0.0;
        return x;
    }
    Eigen::LDLT<Matrix> ldlt(a);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const auto diag = ldlt.vectorD();
        const double dmax = diag.cwiseAbs().maxCoeff();
        if (diag.minCoeff() > rel_tol * std::max(dmax, 1e-300) * 1e3) return ldlt.solve(b);
    }
    return pseudoinverse(a, rel_tol) * b;
}

}  // namespace mvcone
