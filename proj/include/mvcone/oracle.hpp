/**
 * @file oracle.hpp
 * @brief Exact dynamic programming on finite scenario trees
 *
 * The one-step increment law of a Lévy model is replaced by finitely many
 * atoms (Gauss–Hermite nodes for the diffusion, at most one jump per step),
 * identical in every step. Because the one-period problem is homogeneous of
 * degree two in |V|, the DP state reduces to (step, sign of V) and
 *
 *   L±_i = min_{ψ∈K(t_i)} Σ_a p_a [ ((1 ± ψᵀΔs_a)⁺)² L±_{i+1} + ((1 ± ψᵀΔs_a)⁻)² L∓_{i+1} ],
 *
 * with L±_n = 1. Full-tree enumeration is available for checking the
 * martingale property of J = (V⁺)²L⁺ + (V⁻)²L⁻ node by node.
 */

#pragma once

#include "mvcone/cones.hpp"
#include "mvcone/convex.hpp"
#include "mvcone/execution.hpp"
#include "mvcone/model.hpp"
#include "mvcone/opportunity.hpp"

#include <iosfwd>
#include <vector>

namespace mvcone {

/// Nodes and weights of the n-point Gauss–Hermite rule for the standard
/// normal density (weights sum to one). Golub–Welsch construction.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadratureRule gauss_hermite(int n);

struct TreeAtom {
    Vector ds;
    double prob = 0.0;
};

struct ScenarioTree {
    int dim = 0;
    int n_steps = 0;
    double horizon = 0.0;
    std::vector<TreeAtom> atoms;   ///< one-step law, shared by all steps
    std::vector<double> l_plus;    ///< DP values per step (size n_steps+1), empty until solved
    std::vector<double> l_minus;

    double dt() const noexcept { return horizon / n_steps; }
    bool solved() const noexcept { return l_plus.size() == static_cast<std::size_t>(n_steps) + 1; }
};

/// Throws StepTooCoarse when Σ_k λ_k Δt ≥ 1, InvalidArgument for bad counts.
ScenarioTree discretize(const LevyModel& model, int n_steps, int gauss_points);

/// Builds a tree directly from a one-step law (probabilities must be
/// positive and sum to one).
ScenarioTree make_tree(int dim, int n_steps, double horizon, std::vector<TreeAtom> atoms);

struct TreePolicy {
    std::vector<Vector> psi_plus;   ///< per step 0..n−1
    std::vector<Vector> psi_minus;
};

/// Fills tree.l_plus / l_minus and returns the minimizing policy. The cone
/// for step i is cone_fn(t_i). Throws MinimizerUnbounded.
TreePolicy dp_backward(ScenarioTree& tree, const ConeFn& cone_fn, const MinimizeOptions& opts = {});
TreePolicy dp_backward(ScenarioTree& tree, const Cone& cone, const MinimizeOptions& opts = {});

/// Σ_a p_a[((1+sψᵀΔs)⁺)² L_own + ((1+sψᵀΔs)⁻)² L_other] for the tree's one-step law.
double one_step_value(const ScenarioTree& tree, double sign, const Vector& psi, double l_own, double l_other);

struct MartingaleReport {
    std::vector<int> step;          ///< time index of each interior node
    std::vector<double> wealth;     ///< V at the node
    std::vector<double> drift;      ///< E[J_{i+1} | node] − J_i
    double max_drift = 0.0;
    double min_drift = 0.0;
    double max_abs_drift = 0.0;
    std::size_t positive_nodes = 0;  ///< nodes with drift > tol
};

/// Enumerates every node reachable from wealth x under the feedback policy
/// (strategy |V|ψ^{sign V}, zero at V = 0) and reports the one-step drift of J.
/// Nodes are listed in depth-first order for both execution modes.
MartingaleReport check_martingale_optimality(const ScenarioTree& tree, const TreePolicy& policy, double x,
                                             double positive_tol = 1e-12, Execution exec = Execution::Parallel);

struct PolicyValues {
    std::vector<double> l_plus;
    std::vector<double> l_minus;
    double max_violation = 0.0;  ///< max over steps and signs of L± − ℓ±
};

/// Backward recursion with the fixed policy instead of the minimum. With
/// i.i.d. atoms the node value depends on (step, sign) only, so the initial
/// wealth plays no role.
PolicyValues policy_evaluation(const ScenarioTree& tree, const TreePolicy& policy);

struct TerminalLaw {
    std::vector<double> wealth;
    std::vector<double> prob;
};

/// Distribution of V_T from x under the feedback policy, by enumeration.
TerminalLaw terminal_law(const ScenarioTree& tree, const TreePolicy& policy, double x);

struct OdeComparison {
    double max_err_plus = 0.0;
    double max_err_minus = 0.0;
    double l2_err_plus = 0.0;   ///< root-mean-square over the tree grid
    double l2_err_minus = 0.0;
};

/// Compares tree values with an ODE grid whose step count is a multiple of
/// the tree's. Throws GridMismatch otherwise.
OdeComparison compare_to_ode(const ScenarioTree& tree, const OpportunityGrid& grid);

struct ConvergenceRow {
    int n = 0;
    double err = 0.0;  ///< max(max_err_plus, max_err_minus)
};

/// Tree-vs-ODE error for each n in ns (each must divide the ODE step count).
std::vector<ConvergenceRow> convergence_table(const LevyModel& model, const ConeFn& cone_fn,
                                              const OpportunityGrid& grid, const std::vector<int>& ns,
                                              int gauss_points);

/// Columns step, L_plus, L_minus, psi_plus[_j], psi_minus[_j]; the last row has no policy.
void write_tree_csv(std::ostream& os, const ScenarioTree& tree, const TreePolicy& policy);

}  // namespace mvcone
