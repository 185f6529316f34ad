/**
 * @file simulate.hpp
 * @brief Lévy path sampling, the feedback wealth equation and the Markowitz wrappers
 *
 * Wealth follows dV = (V₋⁺ψ̃⁺ + V₋⁻ψ̃⁻) dS with an Euler step for the
 * continuous part and exact application of every jump. Markowitz solutions
 * are rescalings of the base strategy φ̃ obtained from initial wealth −1:
 *
 *   θ̃^{(m,x)} = (m − x) φ̃ / E[φ̃•S_T],     θ̃_γ = (1/γ) φ̃ / E[1 − φ̃•S_T].
 *
 * Monte Carlo kernels come in a serial reference and an OpenMP version that
 * produce bitwise identical per-path results.
 */

#pragma once

#include "mvcone/execution.hpp"
#include "mvcone/model.hpp"
#include "mvcone/opportunity.hpp"
#include "mvcone/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace mvcone {

struct MarketPath {
    std::vector<double> times;
    /// Continuous increment per step: N(b_cont Δt, c Δt), b_cont = b − Σλu.
    std::vector<Vector> continuous;
    /// Atom indices of the jumps in each step, in application order.
    std::vector<std::vector<int>> jumps;
    /// Cumulative S with S(0) = 0.
    std::vector<Vector> s;
    /// Jump sizes u_k of the model atoms, indexed by the entries of jumps.
    std::vector<JumpAtom> atoms;

    std::size_t n_steps() const noexcept { return continuous.size(); }
};

/// Deterministic in (seed, stream). Throws InvalidArgument for n_steps < 1.
MarketPath sample_path(const LevyModel& model, int n_steps, std::uint64_t seed, std::uint64_t stream = 0);

struct WealthPath {
    std::vector<double> times;
    std::vector<double> v;           ///< V(t_i), i = 0..n
    std::vector<Vector> strategy;    ///< φ̃ held over step i, i = 0..n−1
    std::optional<std::size_t> absorbed_at;  ///< first grid index with V = 0
};

/// Threshold below which wealth counts as exactly zero, relative to |x|.
inline constexpr double kAbsorptionTolerance = 1e-14;

/// Throws GridMismatch when the policy grid differs from the path grid.
WealthPath simulate_wealth(double x, const PolicyField& policy, const MarketPath& path);

/// Terminal wealth V_T of n_paths independent paths, path p drawn from
/// stream stream_id(purpose, p). Serial and Parallel agree bitwise.
std::vector<double> terminal_wealth(const LevyModel& model, const PolicyField& policy, double x, int n_paths,
                                    std::uint64_t seed, rng::Purpose purpose = rng::Purpose::Evaluation,
                                    Execution exec = Execution::Parallel);

/// Mean over paths of J_t = (V_t⁺)²L⁺(t) + (V_t⁻)²L⁻(t) and its standard error per grid point.
struct ValueProfile {
    std::vector<double> mean;
    std::vector<double> stderr_mean;
};
ValueProfile value_process_profile(const LevyModel& model, const OpportunitySolution& sol, double x, int n_paths,
                                   std::uint64_t seed);

struct MarkowitzTarget {
    enum class Kind { Mean, RiskAversion } kind = Kind::Mean;
    double value = 0.0;  ///< m or γ

    static MarkowitzTarget mean(double m) { return {Kind::Mean, m}; }
    static MarkowitzTarget risk_aversion(double gamma) { return {Kind::RiskAversion, gamma}; }
};

struct MarkowitzSolution {
    MarkowitzTarget target;
    double x = 0.0;
    double scale = 0.0;        ///< θ̃ = scale · φ̃
    double e_hat = 0.0;        ///< estimate of E[φ̃•S_T]
    double e_hat_stderr = 0.0;
    double tilde_m = 0.0;      ///< switching level x + scale
    PolicyField base_policy;

    /// Wealth under θ̃ given the base wealth V^{(−1)} on the same path.
    double wealth_from_base(double base_wealth) const noexcept { return tilde_m + scale * base_wealth; }
};

/// Builds the Markowitz solution from the base problem at x = −1; e_hat is
/// estimated on the Estimation stream. Throws DegenerateBase when e_hat is
/// within three standard errors of zero (or 1 − e_hat ≤ 0 for the γ form).
MarkowitzSolution markowitz_from_base(const LevyModel& model, const OpportunitySolution& base, double x,
                                      MarkowitzTarget target, int mc_paths, std::uint64_t seed,
                                      Execution exec = Execution::Parallel);

/// Same, with E[φ̃•S_T] supplied exactly (for instance from a tree).
MarkowitzSolution markowitz_from_estimate(const OpportunitySolution& base, double x, MarkowitzTarget target,
                                          double e_hat, double e_hat_stderr = 0.0);

struct FrontierRow {
    double m = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double stderr_mean = 0.0;
    double stderr_variance = 0.0;  ///< Monte Carlo error of the sample variance
    double scale = 0.0;
};

/// Realized mean and variance of V_T(θ̃^{(m,x)}) on common evaluation paths.
std::vector<FrontierRow> efficient_frontier(const LevyModel& model, const OpportunitySolution& base, double x,
                                            const std::vector<double>& m_grid, int mc_paths, std::uint64_t seed,
                                            Execution exec = Execution::Parallel);

/// Columns m, mean, variance, stderr
void write_frontier_csv(std::ostream& os, const std::vector<FrontierRow>& rows);

}  // namespace mvcone
