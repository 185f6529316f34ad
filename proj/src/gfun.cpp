#include "mvcone/gfun.hpp"

#include "mvcone/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mvcone {

GFunction::GFunction(Sign sign, const LevyModel& model, const JointCharacteristics& jc)
    : sign_(sign),
      model_(model),
      jc_(jc),
      s_(sign_value(sign)),
      ell_own_(sign == Sign::Plus ? jc.ell_plus_left : jc.ell_minus_left),
      ell_other_(sign == Sign::Plus ? jc.ell_minus_left : jc.ell_plus_left),
      c_own_(sign == Sign::Plus ? jc.c_s_ell_plus : jc.c_s_ell_minus) {
    validate(jc, model);
}

GEvaluation GFunction::evaluate(const Vector& psi) const {
    if (psi.size() != model_.dim()) fail(ErrorCode::DimensionMismatch, "psi has wrong length");
    const Matrix& c = model_.diffusion();
    const Vector& b = model_.drift();

    GEvaluation out;
    const Vector c_psi = c * psi;
    out.g1 = ell_own_ * psi.dot(c_psi) + 2.0 * s_ * ell_own_ * psi.dot(b) + 2.0 * s_ * psi.dot(c_own_);
    out.gradient = 2.0 * ell_own_ * c_psi + 2.0 * s_ * ell_own_ * b + 2.0 * s_ * c_own_;

    const auto& atoms = model_.jumps();
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const auto& [y, z] = jc_.jump_marks[k];
        const double m_own = sign_ == Sign::Plus ? y : z;
        const double m_other = sign_ == Sign::Plus ? z : y;
        const double a = psi.dot(atoms[k].u);
        const double w = 1.0 + s_ * a;
        const double p = std::max(w, 0.0);
        const double n = std::max(-w, 0.0);
        const double lam = atoms[k].lambda;
        out.g2 += lam * (ell_own_ * (p * p - 1.0 - 2.0 * s_ * a) + (p * p - 1.0) * m_own +
                         n * n * (ell_other_ + m_other));
        const double dg_da =
            ell_own_ * (2.0 * p * s_ - 2.0 * s_) + 2.0 * p * s_ * m_own - 2.0 * n * s_ * (ell_other_ + m_other);
        out.gradient += lam * dg_da * atoms[k].u;
    }
    out.g = out.g1 + out.g2;
    return out;
}

double GFunction::value(const Vector& psi, Vector* grad) const {
    GEvaluation e = evaluate(psi);
    if (grad) *grad = std::move(e.gradient);
    return e.g;
}

void GFunction::piece(const Vector& psi, Matrix& hessian, Vector& linear) const {
    hessian = 2.0 * ell_own_ * model_.diffusion();
    linear = 2.0 * s_ * (ell_own_ * model_.drift() + c_own_);
    const auto& atoms = model_.jumps();
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const auto& [y, z] = jc_.jump_marks[k];
        const double m_own = sign_ == Sign::Plus ? y : z;
        const double m_other = sign_ == Sign::Plus ? z : y;
        const Vector& u = atoms[k].u;
        const double lam = atoms[k].lambda;
        const double w = 1.0 + s_ * psi.dot(u);
        if (w >= 0.0) {
            hessian.noalias() += lam * 2.0 * (ell_own_ + m_own) * u * u.transpose();
            linear += lam * 2.0 * s_ * m_own * u;
        } else {
            hessian.noalias() += lam * 2.0 * (ell_other_ + m_other) * u * u.transpose();
            linear += lam * 2.0 * s_ * (ell_other_ + m_other - ell_own_) * u;
        }
    }
}

Vector GFunction::kink_arguments(const Vector& psi) const {
    const auto& atoms = model_.jumps();
    Vector w(static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t k = 0; k < atoms.size(); ++k) w(static_cast<Eigen::Index>(k)) = 1.0 + s_ * psi.dot(atoms[k].u);
    return w;
}

GEvaluation eval_g(Sign sign, const Vector& psi, const LevyModel& model, const JointCharacteristics& jc) {
    return GFunction(sign, model, jc).evaluate(psi);
}

ConeMinimum minimize_g(Sign sign, const Cone& cone, const LevyModel& model, const JointCharacteristics& jc,
                       const MinimizeOptions& opts) {
    if (cone.dim() != model.dim()) fail(ErrorCode::DimensionMismatch, "cone dimension differs from model");
    const GFunction f(sign, model, jc);
    return minimize_on_cone(f, cone, opts);
}

double drift_of_J(double v_plus, double v_minus, bool at_zero, const Vector& psi, const LevyModel& model,
                  const JointCharacteristics& jc) {
    const bool pos = v_plus > 0.0;
    const bool neg = v_minus > 0.0;
    if (v_plus < 0.0 || v_minus < 0.0 || static_cast<int>(pos) + static_cast<int>(neg) + static_cast<int>(at_zero) != 1) {
        fail(ErrorCode::InvalidState, "wealth state must be exactly one of positive, negative, zero");
    }
    if (psi.size() != model.dim()) fail(ErrorCode::DimensionMismatch, "psi has wrong length");
    validate(jc, model);

    if (pos) return v_plus * v_plus * (eval_g(Sign::Plus, psi, model, jc).g + jc.b_ell_plus);
    if (neg) return v_minus * v_minus * (eval_g(Sign::Minus, psi, model, jc).g + jc.b_ell_minus);

    double out = jc.ell_minus_left * psi.dot(model.diffusion() * psi);
    const auto& atoms = model.jumps();
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const auto& [y, z] = jc.jump_marks[k];
        const double a = psi.dot(atoms[k].u);
        const double ap = std::max(a, 0.0);
        const double an = std::max(-a, 0.0);
        out += atoms[k].lambda * (ap * ap * (jc.ell_plus_left + y) + an * an * (jc.ell_minus_left + z));
    }
    return out;
}

}  // namespace mvcone
