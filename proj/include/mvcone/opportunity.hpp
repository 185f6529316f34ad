/**
 * @file opportunity.hpp
 * @brief Backward integration of the coupled equations for the opportunity processes L±
 *
 * In a Lévy model the opportunity processes are deterministic and satisfy
 *
 *   dL±/dt = −min_{ψ∈K(t)} g±(ψ; S, L⁺(t), L⁻(t)),   L±(T) = 1,
 *
 * which is integrated backward from T on a uniform grid. The minimizers
 * ψ̃±(t) at the grid points form the feedback policy.
 */

#pragma once

#include "mvcone/cones.hpp"
#include "mvcone/convex.hpp"
#include "mvcone/model.hpp"

#include <iosfwd>
#include <string_view>
#include <vector>

namespace mvcone {

enum class Scheme { Euler, RK4 };

std::string_view to_string(Scheme s) noexcept;
/// "euler" | "rk4"; throws InvalidArgument otherwise.
Scheme parse_scheme(std::string_view name);

struct OpportunityGrid {
    std::vector<double> times;
    std::vector<double> l_plus;
    std::vector<double> l_minus;

    std::size_t size() const noexcept { return times.size(); }
};

/// ψ̃± and min g± at each grid point, evaluated at the stored (L⁺, L⁻).
struct PolicyField {
    std::vector<double> times;
    std::vector<Vector> psi_plus;
    std::vector<Vector> psi_minus;
    std::vector<double> min_plus;
    std::vector<double> min_minus;

    std::size_t size() const noexcept { return times.size(); }
};

struct OpportunitySolution {
    OpportunityGrid grid;
    PolicyField policy;
};

struct OpportunityOptions {
    Scheme scheme = Scheme::RK4;
    MinimizeOptions minimize;
    /// Abort with NonPositiveL once a stage value of L± drops to this level.
    double min_level = 1e-10;
};

/// Throws NonPositiveL, MinimizerUnbounded, InvalidArgument (n_steps < 1).
/// The inner minimization is re-solved at every stage, warm-started from the
/// previous stage's minimizer.
OpportunitySolution solve_opportunity(const LevyModel& model, const ConeFn& cone_fn, int n_steps,
                                      const OpportunityOptions& opts = {});

struct UnconstrainedSolution {
    OpportunitySolution solution;  ///< l_plus == l_minus, psi_plus == −psi_minus
    Matrix c_bar;                   ///< c^S + Σ λ u uᵀ
    Vector b_bar;                   ///< b^S
    Vector adjustment;              ///< ā = c̄⁺ b̄
    double rate = 0.0;              ///< b̄ᵀ c̄⁺ b̄, so that dL/dt = rate · L
};

/// Single opportunity process for K = ℝ^d. Throws MinimizerUnbounded when b̄
/// is not in the range of c̄.
UnconstrainedSolution solve_unconstrained(const LevyModel& model, int n_steps, Scheme scheme = Scheme::RK4);

/// Columns t, L_plus, L_minus, min_g_plus, min_g_minus, psi_plus_1..d, psi_minus_1..d
void write_opportunity_csv(std::ostream& os, const OpportunitySolution& sol);

}  // namespace mvcone
