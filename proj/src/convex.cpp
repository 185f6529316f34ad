#include "mvcone/convex.hpp"

#include "mvcone/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mvcone {

std::string_view to_string(MinimumStatus s) noexcept {
    switch (s) {
        case MinimumStatus::Interior: return "Interior";
        case MinimumStatus::Boundary: return "Boundary";
        case MinimumStatus::AtZero: return "AtZero";
        case MinimumStatus::Unbounded: return "Unbounded";
    }
    return "Unknown";
}

namespace {

constexpr double kResidualRel = 1e-9;

MinimumStatus classify(const Vector& x, const Vector& grad, double scale) {
    if (x.size() == 0 || x.isZero(0.0)) return MinimumStatus::AtZero;
    return grad.norm() <= kResidualRel * (1.0 + scale) ? MinimumStatus::Interior : MinimumStatus::Boundary;
}

ConeMinimum unbounded(const Vector& x, int iterations) {
    return ConeMinimum{x, -std::numeric_limits<double>::infinity(), MinimumStatus::Unbounded, iterations};
}

double quad_value(const Matrix& h, const Vector& r, const Vector& x) { return 0.5 * x.dot(h * x) + r.dot(x); }

/// Minimizes the quadratic restricted to span(basis); nullopt when the
/// restricted problem is unbounded below.
std::optional<Vector> face_minimizer(const Matrix& h, const Vector& r, const Matrix& basis) {
    const Matrix hs = basis.transpose() * h * basis;
    const Vector rs = basis.transpose() * r;
    const Vector z = solve_psd(hs, -rs);
    if ((hs * z + rs).norm() > kResidualRel * (1.0 + rs.norm() + hs.norm() * z.norm())) return std::nullopt;
    return Vector(basis * z);
}

std::optional<ConeMinimum> orthant_closed_form(const Matrix& h, const Vector& r) {
    const int d = static_cast<int>(r.size());
    if (d > 20) return std::nullopt;
    const double kkt_tol = 1e-12 * (1.0 + r.norm());
    std::optional<ConeMinimum> best;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        std::vector<Eigen::Index> free;
        for (int i = 0; i < d; ++i) if (mask & (1u << i)) free.push_back(i);
        Vector x = Vector::Zero(d);
        if (!free.empty()) {
            const auto n = static_cast<Eigen::Index>(free.size());
            Matrix hs(n, n);
            Vector rs(n);
            for (Eigen::Index a = 0; a < n; ++a) {
                rs(a) = r(free[a]);
                for (Eigen::Index b = 0; b < n; ++b) hs(a, b) = h(free[a], free[b]);
            }
            const Vector z = solve_psd(hs, -rs);
            if ((hs * z + rs).norm() > kResidualRel * (1.0 + rs.norm() + hs.norm() * z.norm())) continue;
            if (z.minCoeff() < 0.0) continue;
            for (Eigen::Index a = 0; a < n; ++a) x(free[a]) = z(a);
        }
        const Vector grad = h * x + r;
        bool kkt = true;
        for (int i = 0; i < d; ++i) {
            if (!(mask & (1u << i)) && grad(i) < -kkt_tol) kkt = false;
        }
        if (!kkt) continue;
        const double v = quad_value(h, r, x);
        const bool better = !best || v < best->value - 1e-15 * (1.0 + std::abs(v)) ||
                            (std::abs(v - best->value) <= 1e-15 * (1.0 + std::abs(v)) &&
                             x.norm() < best->minimizer.norm());
        if (better) best = ConeMinimum{x, v, classify(x, grad, r.norm()), 0};
    }
    return best;
}

/// Columns spanning the face of K on which x currently sits; nullopt when
/// the cone type has no cheap face description.
std::optional<Matrix> active_face(const Cone& k, const Vector& x) {
    const int d = k.dim();
    if (std::holds_alternative<cone::FullSpace>(k.variant())) return Matrix(Matrix::Identity(d, d));
    if (const auto* s = std::get_if<cone::Span>(&k.variant())) return s->basis;
    if (const auto* r = std::get_if<cone::Ray>(&k.variant())) {
        if (r->direction.dot(x) > 0.0) return Matrix(r->direction);
        return std::nullopt;
    }
    if (std::holds_alternative<cone::Orthant>(k.variant())) {
        std::vector<int> free;
        for (int i = 0; i < d; ++i) if (x(i) > 0.0) free.push_back(i);
        if (free.empty()) return std::nullopt;
        Matrix b = Matrix::Zero(d, static_cast<Eigen::Index>(free.size()));
        for (std::size_t j = 0; j < free.size(); ++j) b(free[j], static_cast<Eigen::Index>(j)) = 1.0;
        return b;
    }
    return std::nullopt;
}

bool same_piece(const Vector& w_old, const Vector& w_new) {
    for (Eigen::Index k = 0; k < w_old.size(); ++k) {
        if ((w_old(k) >= 0.0) == (w_new(k) >= 0.0)) continue;
        if (std::abs(w_new(k)) <= 1e-12 * (1.0 + std::abs(w_old(k)))) continue;
        return false;
    }
    return true;
}

/// Jumps to the exact minimizer of the active quadratic piece on the active
/// face when that point stays feasible, on the same piece, and no worse.
void polish(const PiecewiseQuadratic& f, const Cone& k, Vector& x, double& fx) {
    for (int round = 0; round < 3; ++round) {
        const auto face = active_face(k, x);
        if (!face) return;
        Matrix h;
        Vector r;
        f.piece(x, h, r);
        const auto cand = face_minimizer(h, r, *face);
        if (!cand) return;
        Vector xn = *cand;
        const Vector px = k.project(xn);
        if ((xn - px).norm() > 1e-13 * (1.0 + xn.norm())) return;
        xn = px;
        if (!same_piece(f.kink_arguments(x), f.kink_arguments(xn))) return;
        const double fn = f.value(xn, nullptr);
        if (fn > fx + 1e-13 * (1.0 + std::abs(fx))) return;
        const bool moved = xn != x;
        x = xn;
        fx = fn;
        if (!moved) return;
    }
}

}  // namespace

std::optional<ConeMinimum> minimize_quadratic_closed_form(const Matrix& h, const Vector& r, const Cone& k) {
    const int d = k.dim();
    const double hnorm = h.norm();
    const auto& v = k.variant();
    if (std::holds_alternative<cone::Zero>(v)) {
        return ConeMinimum{Vector::Zero(d), 0.0, MinimumStatus::AtZero, 0};
    }
    if (std::holds_alternative<cone::FullSpace>(v) || std::holds_alternative<cone::Span>(v)) {
        const Matrix basis = std::holds_alternative<cone::FullSpace>(v) ? Matrix(Matrix::Identity(d, d))
                                                                       : std::get<cone::Span>(v).basis;
        if (basis.cols() == 0) return ConeMinimum{Vector::Zero(d), 0.0, MinimumStatus::AtZero, 0};
        const auto x = face_minimizer(h, r, basis);
        if (!x) return unbounded(Vector::Zero(d), 0);
        return ConeMinimum{*x, quad_value(h, r, *x), classify(*x, h * *x + r, r.norm()), 0};
    }
    if (const auto* ray = std::get_if<cone::Ray>(&v)) {
        const Vector& dir = ray->direction;
        const double a = dir.dot(h * dir);
        const double q = dir.dot(r);
        double t = 0.0;
        if (a > 1e-14 * hnorm && a > 0.0) {
            t = std::max(0.0, -q / a);
        } else if (q < -1e-14 * (1.0 + r.norm())) {
            return unbounded(Vector::Zero(d), 0);
        }
        const Vector x = t * dir;
        return ConeMinimum{x, quad_value(h, r, x), classify(x, h * x + r, r.norm()), 0};
    }
    if (std::holds_alternative<cone::Orthant>(v)) return orthant_closed_form(h, r);
    return std::nullopt;
}

ConeMinimum minimize_on_cone(const PiecewiseQuadratic& f, const Cone& k, const MinimizeOptions& opts) {
    const int d = f.dim();
    if (k.dim() != d) fail(ErrorCode::DimensionMismatch, "cone and objective dimensions differ");
    const Vector zero = Vector::Zero(d);
    const double f0 = f.value(zero, nullptr);

    if (std::holds_alternative<cone::Zero>(k.variant())) return ConeMinimum{zero, f0, MinimumStatus::AtZero, 0};

    if (f.is_quadratic()) {
        Matrix h;
        Vector r;
        f.piece(zero, h, r);
        if (auto cf = minimize_quadratic_closed_form(h, r, k)) {
            if (cf->status != MinimumStatus::Unbounded) {
                cf->value = f.value(cf->minimizer, nullptr);
                if (cf->value >= f0) *cf = ConeMinimum{zero, f0, MinimumStatus::AtZero, 0};
            }
            return *cf;
        }
    }

    Vector x = (opts.warm_start && opts.warm_start->size() == d) ? k.project(*opts.warm_start) : zero;
    Vector g(d);
    double fx = f.value(x, &g);

    double alpha = 1.0;
    {
        Matrix h;
        Vector r;
        f.piece(x, h, r);
        const double lip = h.norm();
        if (lip > 0.0) alpha = 1.0 / lip;
    }

    int it = 0;
    bool converged = false;
    for (; it < opts.max_iterations; ++it) {
        const double residual = (x - k.project(x - g)).norm();
        if (residual <= opts.tolerance) {
            converged = true;
            break;
        }
        double a = alpha;
        Vector xn(d), gn(d);
        double fn = 0.0;
        bool accepted = false;
        while (a > 1e-30) {
            xn = k.project(x - a * g);
            fn = f.value(xn, &gn);
            if (xn.norm() > opts.divergence_cap && fn < fx) return unbounded(xn, it + 1);
            if (fn <= fx + opts.armijo * g.dot(xn - x)) {
                accepted = true;
                break;
            }
            a *= 0.5;
        }
        if (!accepted || xn == x) {
            // stalled at floating-point resolution
            break;
        }
        const Vector s = xn - x;
        const Vector y = gn - g;
        const double sy = s.dot(y);
        alpha = sy > 0.0 ? s.squaredNorm() / sy : 10.0 * a;
        alpha = std::clamp(alpha, 1e-20, 1e20);
        x = xn;
        fx = fn;
        g = gn;
    }
    polish(f, k, x, fx);
    f.value(x, &g);

    if (!converged) {
        const double residual = (x - k.project(x - g)).norm();
        if (residual > opts.tolerance && (it >= opts.max_iterations || residual > std::sqrt(opts.tolerance))) {
            fail(ErrorCode::NotConverged, "projected gradient stopped after " + std::to_string(it) +
                                              " iterations with first-order residual " + std::to_string(residual));
        }
    }

    if (fx >= f0) return ConeMinimum{zero, f0, MinimumStatus::AtZero, it};
    return ConeMinimum{x, fx, classify(x, g, std::abs(fx)), it};
}

}  // namespace mvcone
