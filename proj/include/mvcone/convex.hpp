/**
 * @file convex.hpp
 * @brief Cone-constrained minimization of convex, C¹, piecewise-quadratic objectives
 *
 * Both the local g-functions and the one-period dynamic-programming
 * objective of the tree oracle are sums of a quadratic and terms of the form
 * κ⁺·((w)⁺)² + κ⁻·((w)⁻)² with w affine in ψ. Such functions are convex,
 * continuously differentiable and quadratic on each region where the signs of
 * the kink arguments w are fixed.
 *
 * The minimizer runs projected gradient descent (Barzilai–Borwein trial step,
 * Armijo backtracking by halving) from a feasible start, then polishes the
 * result by solving the quadratic of the active piece exactly on the active
 * face of the cone. Purely quadratic objectives over full/span/orthant/ray
 * cones are solved in closed form.
 */

#pragma once

#include "mvcone/cones.hpp"
#include "mvcone/linalg.hpp"

#include <optional>
#include <string_view>

namespace mvcone {

enum class MinimumStatus { Interior, Boundary, AtZero, Unbounded };

std::string_view to_string(MinimumStatus s) noexcept;

struct MinimizeOptions {
    double tolerance = 1e-10;  ///< first-order residual ‖ψ − P_K(ψ − ∇f)‖
    int max_iterations = 10000;
    double armijo = 1e-4;
    double divergence_cap = 1e8;
    std::optional<Vector> warm_start;
};

struct ConeMinimum {
    Vector minimizer;
    double value = 0.0;
    MinimumStatus status = MinimumStatus::AtZero;
    int iterations = 0;
};

/// Objective interface. Kinks are resolved toward the w ≥ 0 side.
class PiecewiseQuadratic {
public:
    virtual ~PiecewiseQuadratic() = default;

    virtual int dim() const = 0;

    /// f(x); fills grad when non-null.
    virtual double value(const Vector& x, Vector* grad) const = 0;

    /// f = ½ xᵀ H x + rᵀ x + const on the piece containing x.
    virtual void piece(const Vector& x, Matrix& hessian, Vector& linear) const = 0;

    /// Kink arguments w_k(x); the piece is determined by their signs.
    virtual Vector kink_arguments(const Vector& x) const = 0;

    /// True when there are no kinks, i.e. f is one global quadratic.
    virtual bool is_quadratic() const = 0;
};

/// Minimizes f over K. Never throws for unboundedness: status Unbounded is
/// returned with value −∞. Throws NotConverged on hitting the iteration cap.
ConeMinimum minimize_on_cone(const PiecewiseQuadratic& f, const Cone& cone, const MinimizeOptions& opts = {});

/// Closed-form minimum of ½xᵀHx + rᵀx over full/span/orthant/ray/zero cones;
/// nullopt for other cone types or when the face enumeration is inconclusive.
std::optional<ConeMinimum> minimize_quadratic_closed_form(const Matrix& hessian, const Vector& linear,
                                                          const Cone& cone);

}  // namespace mvcone
