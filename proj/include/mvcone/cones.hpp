/**
 * @file cones.hpp
 * @brief Closed convex cones K ⊂ ℝ^d used as trading constraints
 *
 * Each cone supports a membership test and the exact Euclidean projection.
 * Polyhedral cones {G w : w ≥ 0} are projected by solving the nonnegative
 * least-squares problem min_{w≥0} ‖G w − x‖² with the Lawson–Hanson
 * active-set method.
 *
 * Time-dependent constraints are a ConeFn t ↦ Cone sampled on a solver grid.
 */

#pragma once

#include "mvcone/linalg.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace mvcone {

class Cone;

namespace cone {
struct FullSpace { int dim; };
struct Zero { int dim; };
struct Orthant { int dim; };
struct Ray { Vector direction; };        ///< unit vector
struct Span { Matrix basis; };           ///< orthonormal columns
struct Polyhedral { Matrix generators; };  ///< one generator per column
struct Product { std::vector<Cone> parts; };
}  // namespace cone

class Cone {
public:
    using Variant = std::variant<cone::FullSpace, cone::Zero, cone::Orthant, cone::Ray, cone::Span,
                                 cone::Polyhedral, cone::Product>;

    static Cone full_space(int dim);
    static Cone zero(int dim);
    static Cone orthant(int dim);
    /// direction is normalized; throws InvalidArgument for the zero vector.
    static Cone ray(const Vector& direction);
    /// spanning vectors are orthonormalized; dependent ones are dropped.
    static Cone span(int dim, const std::vector<Vector>& vectors);
    static Cone polyhedral(int dim, const std::vector<Vector>& generators);
    static Cone product(std::vector<Cone> parts);

    int dim() const;
    const Variant& variant() const noexcept { return v_; }
    std::string kind() const;

    /// distance(x, K) ≤ tol · (1 + ‖x‖)
    bool contains(const Vector& x, double tol = 1e-10) const;

    /// Euclidean projection onto K. Throws DimensionMismatch, or
    /// ProjectionNotConverged when the NNLS iteration cap is hit.
    Vector project(const Vector& x) const;

    /// Projection onto the polar cone K° = {y : ⟨y, k⟩ ≤ 0 ∀k ∈ K}, from
    /// the Moreau identity x = P_K x + P_{K°} x.
    Vector project_polar(const Vector& x) const { return x - project(x); }

    /// K = −K
    bool is_symmetric() const;

private:
    explicit Cone(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

using ConeFn = std::function<Cone(double)>;

inline ConeFn constant_cone(Cone k) {
    return [k = std::move(k)](double) { return k; };
}

struct NnlsResult {
    Vector weights;
    int iterations = 0;
};

/// Lawson–Hanson active-set NNLS: argmin_{w ≥ 0} ‖A w − b‖².
/// Throws ProjectionNotConverged beyond max_iter outer iterations.
NnlsResult nnls(const Matrix& a, const Vector& b, int max_iter, double tol = 1e-12);

}  // namespace mvcone
