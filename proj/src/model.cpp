#include "mvcone/model.hpp"

#include "mvcone/errors.hpp"

#include <cmath>
#include <string>

namespace mvcone {

namespace {

constexpr double kPsdRelTol = 1e-12;

Matrix symmetrize_and_clip(const Matrix& c) {
    Matrix sym = 0.5 * (c + c.transpose());
    if (sym.size() == 0) return sym;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const Vector& ev = eig.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    if (ev.minCoeff() < -kPsdRelTol * scale) {
        fail(ErrorCode::NotPSD, "diffusion matrix has eigenvalue " + std::to_string(ev.minCoeff()));
    }
    if (ev.minCoeff() >= 0.0) return sym;
    const Vector clipped = ev.cwiseMax(0.0);
    Matrix out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

}  // namespace

LevyModel build_levy_model(int dim, Vector drift, Matrix diffusion, std::vector<JumpAtom> jumps,
                           double horizon) {
    if (dim < 1) fail(ErrorCode::DimensionMismatch, "dim must be >= 1");
    if (drift.size() != dim) fail(ErrorCode::DimensionMismatch, "drift has wrong length");
    if (diffusion.rows() != dim || diffusion.cols() != dim) {
        fail(ErrorCode::DimensionMismatch, "diffusion must be dim x dim");
    }
    for (std::size_t k = 0; k < jumps.size(); ++k) {
        if (jumps[k].u.size() != dim) {
            fail(ErrorCode::DimensionMismatch, "jump atom " + std::to_string(k) + " has wrong length");
        }
        if (!(jumps[k].lambda > 0.0) || !std::isfinite(jumps[k].lambda)) {
            fail(ErrorCode::NonpositiveIntensity, "jump atom " + std::to_string(k));
        }
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) fail(ErrorCode::NonpositiveHorizon, "horizon must be > 0");
    if (!drift.allFinite() || !diffusion.allFinite()) fail(ErrorCode::InvalidArgument, "non-finite model entry");

    LevyModel m;
    m.dim_ = dim;
    m.drift_ = std::move(drift);
    m.diffusion_ = symmetrize_and_clip(diffusion);
    m.jumps_ = std::move(jumps);
    m.horizon_ = horizon;
    return m;
}

Matrix second_moment(const LevyModel& model) {
    Matrix m = Matrix::Zero(model.dim(), model.dim());
    for (const auto& a : model.jumps()) m.noalias() += a.lambda * a.u * a.u.transpose();
    return m;
}

Vector continuous_drift(const LevyModel& model) {
    Vector b = model.drift();
    for (const auto& a : model.jumps()) b -= a.lambda * a.u;
    return b;
}

void validate(const JointCharacteristics& jc, const LevyModel& model) {
    const auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!in_unit(jc.ell_plus_left) || !in_unit(jc.ell_minus_left)) {
        fail(ErrorCode::OutOfRange, "left limits of ell must lie in (0,1]");
    }
    if (jc.c_s_ell_plus.size() != model.dim() || jc.c_s_ell_minus.size() != model.dim()) {
        fail(ErrorCode::DimensionMismatch, "c^{S,ell} has wrong length");
    }
    if (jc.jump_marks.size() != model.jumps().size()) {
        fail(ErrorCode::DimensionMismatch, "one (y, z) mark pair per jump atom required");
    }
    for (const auto& [y, z] : jc.jump_marks) {
        if (jc.ell_plus_left + y < 0.0 || jc.ell_minus_left + z < 0.0) {
            fail(ErrorCode::OutOfRange, "post-jump ell would be negative");
        }
    }
}

JointCharacteristics deterministic_joint_characteristics(const LevyModel& model, double ell_plus,
                                                         double ell_minus, double dell_plus_dt,
                                                         double dell_minus_dt) {
    if (!(ell_plus > 0.0 && ell_plus <= 1.0) || !(ell_minus > 0.0 && ell_minus <= 1.0)) {
        fail(ErrorCode::OutOfRange, "ell must lie in (0,1]");
    }
    JointCharacteristics jc;
    jc.ell_plus_left = ell_plus;
    jc.ell_minus_left = ell_minus;
    jc.b_ell_plus = dell_plus_dt;
    jc.b_ell_minus = dell_minus_dt;
    jc.c_s_ell_plus = Vector::Zero(model.dim());
    jc.c_s_ell_minus = Vector::Zero(model.dim());
    jc.jump_marks.assign(model.jumps().size(), {0.0, 0.0});
    return jc;
}

}  // namespace mvcone
