/**
 * @file gfun.hpp
 * @brief The local functions g^{1,±}, g^{2,±}, g^± and the drift of the value process
 *
 * For a sign s ∈ {+1, −1} ("own" side s, "other" side −s) and jump atoms
 * (u_k, λ_k) with co-jumps (y_k, z_k) of (ℓ⁺, ℓ⁻):
 *
 *   g^{1,s}(ψ) = ℓ_own ψᵀcψ + 2s ℓ_own ψᵀb + 2s ψᵀc^{Sℓ_own}
 *
 *   g^{2,s}(ψ) = Σ_k λ_k [ ℓ_own ((w_k⁺)² − 1 − 2s ψᵀu_k)
 *                        + ((w_k⁺)² − 1) m_own,k
 *                        + (w_k⁻)² (ℓ_other + m_other,k) ],   w_k = 1 + s ψᵀu_k
 *
 * where m_own,k is the co-jump of the own-side ℓ (y_k for s=+, z_k for s=−).
 * g^s = g^{1,s} + g^{2,s} is convex and C¹ in ψ with g^s(0) = 0.
 *
 * The gradient is the chain-rule derivative of the expression above.
 */

#pragma once

#include "mvcone/cones.hpp"
#include "mvcone/convex.hpp"
#include "mvcone/model.hpp"

namespace mvcone {

enum class Sign { Plus, Minus };

inline double sign_value(Sign s) noexcept { return s == Sign::Plus ? 1.0 : -1.0; }
inline Sign opposite(Sign s) noexcept { return s == Sign::Plus ? Sign::Minus : Sign::Plus; }

struct GEvaluation {
    double g1 = 0.0;
    double g2 = 0.0;
    double g = 0.0;
    Vector gradient;
};

/// g^± as a PiecewiseQuadratic objective (kinks at w_k = 0).
class GFunction final : public PiecewiseQuadratic {
public:
    GFunction(Sign sign, const LevyModel& model, const JointCharacteristics& jc);

    int dim() const override { return model_.dim(); }
    double value(const Vector& psi, Vector* grad) const override;
    void piece(const Vector& psi, Matrix& hessian, Vector& linear) const override;
    Vector kink_arguments(const Vector& psi) const override;
    bool is_quadratic() const override { return !model_.has_jumps(); }

    GEvaluation evaluate(const Vector& psi) const;

private:
    Sign sign_;
    const LevyModel& model_;
    const JointCharacteristics& jc_;
    double s_;
    double ell_own_;
    double ell_other_;
    const Vector& c_own_;
};

/// Throws DimensionMismatch (and the validation errors of JointCharacteristics).
GEvaluation eval_g(Sign sign, const Vector& psi, const LevyModel& model, const JointCharacteristics& jc);

/// min_{ψ∈K} g^±(ψ). Continuous models over full/span/orthant/ray cones are
/// solved in closed form; everything else by projected gradient from ψ₀ = 0
/// (or opts.warm_start). Value ≤ 0 always, since ψ = 0 is feasible.
ConeMinimum minimize_g(Sign sign, const Cone& cone, const LevyModel& model, const JointCharacteristics& jc,
                       const MinimizeOptions& opts = {});

/// Drift rate of J = (V⁺)²ℓ⁺ + (V⁻)²ℓ⁻ for the strategy ϑ = |V₋|ψ (or ψ when
/// V₋ = 0):
///
///   (V₋⁺)²{g⁺(ψ) + b^{ℓ⁺}} + (V₋⁻)²{g⁻(ψ) + b^{ℓ⁻}}
///   + 1{V₋=0} ( Σλ((ψᵀu)⁺)²(ℓ⁺₋+y) + ℓ⁻₋ψᵀcψ + Σλ((ψᵀu)⁻)²(ℓ⁻₋+z) )
///
/// Exactly one of v_plus > 0, v_minus > 0, at_zero must describe the state;
/// otherwise InvalidState.
double drift_of_J(double v_plus, double v_minus, bool at_zero, const Vector& psi, const LevyModel& model,
                  const JointCharacteristics& jc);

}  // namespace mvcone
