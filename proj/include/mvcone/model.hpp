/**
 * @file model.hpp
 * @brief Lévy market model and the joint-characteristics bundle fed to the g-functions
 *
 * The price process S is a d-dimensional Lévy process described by its
 * differential characteristics relative to the clock B(t) = t:
 *
 *   drift b^S          (truncation h(x) = x, so b^S is the full drift rate)
 *   diffusion c^S      (symmetric PSD d×d)
 *   jump measure F^S   (finite list of atoms u_k with intensities λ_k)
 *
 * JointCharacteristics carries the per-time quantities that couple S with
 * the two opportunity processes ℓ±: their left limits, drift rates, the
 * continuous covariations c^{Sℓ±} and, per jump atom, the co-jumps (y_k, z_k)
 * of ℓ⁺ and ℓ⁻.
 */

#pragma once

#include "mvcone/linalg.hpp"

#include <utility>
#include <vector>

namespace mvcone {

struct JumpAtom {
    Vector u;       ///< jump size
    double lambda;  ///< intensity per unit time
};

class LevyModel {
public:
    int dim() const noexcept { return dim_; }
    const Vector& drift() const noexcept { return drift_; }
    const Matrix& diffusion() const noexcept { return diffusion_; }
    const std::vector<JumpAtom>& jumps() const noexcept { return jumps_; }
    double horizon() const noexcept { return horizon_; }
    bool has_jumps() const noexcept { return !jumps_.empty(); }

private:
    friend LevyModel build_levy_model(int, Vector, Matrix, std::vector<JumpAtom>, double);
    LevyModel() = default;

    int dim_ = 0;
    Vector drift_;
    Matrix diffusion_;
    std::vector<JumpAtom> jumps_;
    double horizon_ = 0.0;
};

/// Validates and builds a model. The diffusion matrix is symmetrized as
/// (c + cᵀ)/2; eigenvalues in [-1e-12·‖c‖, 0) are clipped to zero.
/// Throws DimensionMismatch, NotPSD, NonpositiveIntensity, NonpositiveHorizon.
LevyModel build_levy_model(int dim, Vector drift, Matrix diffusion, std::vector<JumpAtom> jumps,
                           double horizon);

/// Σ_k λ_k u_k u_kᵀ
Matrix second_moment(const LevyModel& model);

/// b^S − Σ_k λ_k u_k: the drift of the continuous part once the jumps are
/// left uncompensated.
Vector continuous_drift(const LevyModel& model);

struct JointCharacteristics {
    double ell_plus_left = 1.0;
    double ell_minus_left = 1.0;
    double b_ell_plus = 0.0;
    double b_ell_minus = 0.0;
    Vector c_s_ell_plus;
    Vector c_s_ell_minus;
    /// (y_k, z_k): jumps of ℓ⁺ and ℓ⁻ co-occurring with atom k.
    std::vector<std::pair<double, double>> jump_marks;
};

/// Checks shapes against the model, ℓ±₋ ∈ (0,1] and ℓ±₋ + marks ≥ 0.
void validate(const JointCharacteristics& jc, const LevyModel& model);

/// Deterministic absolutely continuous ℓ± have no martingale part, so every
/// coupling field vanishes and only ℓ±₋ and b^{ℓ±} = dℓ±/dt remain.
/// Throws OutOfRange unless ℓ± ∈ (0,1].
JointCharacteristics deterministic_joint_characteristics(const LevyModel& model, double ell_plus,
                                                         double ell_minus, double dell_plus_dt,
                                                         double dell_minus_dt);

}  // namespace mvcone
