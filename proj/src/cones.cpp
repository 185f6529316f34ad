#include "mvcone/cones.hpp"

#include "mvcone/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvcone {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_dim(int expected, const Vector& x) {
    if (x.size() != expected) {
        fail(ErrorCode::DimensionMismatch,
             "vector of length " + std::to_string(x.size()) + " for cone of dimension " + std::to_string(expected));
    }
}

}  // namespace

NnlsResult nnls(const Matrix& a, const Vector& b, int max_iter, double tol) {
    const Eigen::Index n = a.cols();
    NnlsResult res;
    res.weights = Vector::Zero(n);
    if (n == 0) return res;

    std::vector<bool> passive(n, false);
    Vector& w = res.weights;
    const double grad_scale = std::max(1.0, (a.transpose() * b).cwiseAbs().maxCoeff());

    auto solve_passive = [&](Vector& s) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j) if (passive[j]) idx.push_back(j);
        Matrix ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
        const Vector sp = ap.completeOrthogonalDecomposition().solve(b);
        s = Vector::Zero(n);
        for (std::size_t k = 0; k < idx.size(); ++k) s(idx[k]) = sp(static_cast<Eigen::Index>(k));
    };

    while (true) {
        const Vector grad = a.transpose() * (b - a * w);
        Eigen::Index best = -1;
        double best_val = tol * grad_scale;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!passive[j] && grad(j) > best_val) {
                best_val = grad(j);
                best = j;
            }
        }
        if (best < 0) break;
        passive[best] = true;

        while (true) {
            if (++res.iterations > max_iter) {
                fail(ErrorCode::ProjectionNotConverged, "NNLS exceeded " + std::to_string(max_iter) + " iterations");
            }
            Vector s;
            solve_passive(s);
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[j] && s(j) <= 0.0) feasible = false;
            }
            if (feasible) {
                w = s;
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[j] && s(j) <= 0.0) alpha = std::min(alpha, w(j) / (w(j) - s(j)));
            }
            w += alpha * (s - w);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[j] && w(j) <= tol * std::max(1.0, w.cwiseAbs().maxCoeff())) {
                    passive[j] = false;
                    w(j) = 0.0;
                }
            }
        }
    }
    return res;
}

Cone Cone::full_space(int dim) { return Cone(cone::FullSpace{dim}); }
Cone Cone::zero(int dim) { return Cone(cone::Zero{dim}); }
Cone Cone::orthant(int dim) { return Cone(cone::Orthant{dim}); }

Cone Cone::ray(const Vector& direction) {
    const double n = direction.norm();
    if (!(n > 0.0)) fail(ErrorCode::InvalidArgument, "ray direction must be nonzero");
    return Cone(cone::Ray{direction / n});
}

Cone Cone::span(int dim, const std::vector<Vector>& vectors) {
    Matrix m(dim, static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        check_dim(dim, vectors[k]);
        m.col(static_cast<Eigen::Index>(k)) = vectors[k];
    }
    if (vectors.empty()) return Cone(cone::Span{Matrix(dim, 0)});
    Eigen::ColPivHouseholderQR<Matrix> qr(m);
    qr.setThreshold(1e-12);
    const Eigen::Index rank = qr.rank();
    Matrix q = qr.householderQ() * Matrix::Identity(dim, rank);
    return Cone(cone::Span{q});
}

Cone Cone::polyhedral(int dim, const std::vector<Vector>& generators) {
    Matrix g(dim, static_cast<Eigen::Index>(generators.size()));
    for (std::size_t k = 0; k < generators.size(); ++k) {
        check_dim(dim, generators[k]);
        g.col(static_cast<Eigen::Index>(k)) = generators[k];
    }
    return Cone(cone::Polyhedral{g});
}

Cone Cone::product(std::vector<Cone> parts) { return Cone(cone::Product{std::move(parts)}); }

int Cone::dim() const {
    return std::visit(overloaded{
                          [](const cone::FullSpace& c) { return c.dim; },
                          [](const cone::Zero& c) { return c.dim; },
                          [](const cone::Orthant& c) { return c.dim; },
                          [](const cone::Ray& c) { return static_cast<int>(c.direction.size()); },
                          [](const cone::Span& c) { return static_cast<int>(c.basis.rows()); },
                          [](const cone::Polyhedral& c) { return static_cast<int>(c.generators.rows()); },
                          [](const cone::Product& c) {
                              int d = 0;
                              for (const auto& p : c.parts) d += p.dim();
                              return d;
                          },
                      },
                      v_);
}

std::string Cone::kind() const {
    return std::visit(overloaded{
                          [](const cone::FullSpace&) { return std::string("full"); },
                          [](const cone::Zero&) { return std::string("zero"); },
                          [](const cone::Orthant&) { return std::string("orthant"); },
                          [](const cone::Ray&) { return std::string("ray"); },
                          [](const cone::Span&) { return std::string("span"); },
                          [](const cone::Polyhedral&) { return std::string("polyhedral"); },
                          [](const cone::Product&) { return std::string("product"); },
                      },
                      v_);
}

Vector Cone::project(const Vector& x) const {
    check_dim(dim(), x);
    return std::visit(overloaded{
                          [&](const cone::FullSpace&) -> Vector { return x; },
                          [&](const cone::Zero& c) -> Vector { return Vector::Zero(c.dim); },
                          [&](const cone::Orthant&) -> Vector { return x.cwiseMax(0.0); },
                          [&](const cone::Ray& c) -> Vector {
                              return std::max(0.0, c.direction.dot(x)) * c.direction;
                          },
                          [&](const cone::Span& c) -> Vector {
                              return c.basis * (c.basis.transpose() * x);
                          },
                          [&](const cone::Polyhedral& c) -> Vector {
                              const int cap = 100 * std::max<int>(1, static_cast<int>(c.generators.cols()));
                              return c.generators * nnls(c.generators, x, cap).weights;
                          },
                          [&](const cone::Product& c) -> Vector {
                              Vector out(x.size());
                              Eigen::Index off = 0;
                              for (const auto& p : c.parts) {
                                  const Eigen::Index n = p.dim();
                                  out.segment(off, n) = p.project(x.segment(off, n));
                                  off += n;
                              }
                              return out;
                          },
                      },
                      v_);
}

bool Cone::contains(const Vector& x, double tol) const {
    check_dim(dim(), x);
    const double dist = (x - project(x)).norm();
    return dist <= tol * (1.0 + x.norm());
}

bool Cone::is_symmetric() const {
    return std::visit(overloaded{
                          [](const cone::FullSpace&) { return true; },
                          [](const cone::Zero&) { return true; },
                          [](const cone::Orthant& c) { return c.dim == 0; },
                          [](const cone::Ray&) { return false; },
                          [](const cone::Span&) { return true; },
                          [](const cone::Polyhedral& c) {
                              const Cone self{Variant{c}};
                              for (Eigen::Index j = 0; j < c.generators.cols(); ++j) {
                                  if (!self.contains(-c.generators.col(j), 1e-12)) return false;
                              }
                              return true;
                          },
                          [](const cone::Product& c) {
                              return std::all_of(c.parts.begin(), c.parts.end(),
                                                 [](const Cone& p) { return p.is_symmetric(); });
                          },
                      },
                      v_);
}

}  // namespace mvcone
