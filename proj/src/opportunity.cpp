#include "mvcone/opportunity.hpp"

#include "mvcone/csv.hpp"
#include "mvcone/errors.hpp"
#include "mvcone/gfun.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace mvcone {

std::string_view to_string(Scheme s) noexcept {
    switch (s) {
        case Scheme::Euler: return "euler";
        case Scheme::RK4: return "rk4";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "euler") return Scheme::Euler;
    if (name == "rk4") return Scheme::RK4;
    fail(ErrorCode::InvalidArgument, "unknown scheme '" + std::string(name) + "' (expected euler or rk4)");
}

namespace {

std::vector<double> uniform_grid(double horizon, int n) {
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = horizon * static_cast<double>(i) / n;
    t.back() = horizon;
    return t;
}

struct StageResult {
    double f_plus = 0.0;  ///< dL⁺/dt = −min g⁺
    double f_minus = 0.0;
    ConeMinimum plus;
    ConeMinimum minus;
};

/// Right-hand side of the coupled system at (t, L⁺, L⁻). Warm starts are
/// updated in place with the new minimizers.
class RightHandSide {
public:
    RightHandSide(const LevyModel& model, const ConeFn& cone_fn, const OpportunityOptions& opts)
        : model_(model), cone_fn_(cone_fn), opts_(opts) {}

    StageResult operator()(double t, double lp, double lm) {
        if (!(lp > opts_.min_level) || !(lm > opts_.min_level)) {
            fail(ErrorCode::NonPositiveL, "opportunity process reached " + std::to_string(std::min(lp, lm)) +
                                              " at t=" + std::to_string(t));
        }
        // Round-off can push a stage value a hair above 1 when the drift vanishes.
        const JointCharacteristics jc =
            deterministic_joint_characteristics(model_, std::min(lp, 1.0), std::min(lm, 1.0), 0.0, 0.0);
        const Cone k = cone_fn_(t);
        StageResult out;
        out.plus = solve(Sign::Plus, k, jc, warm_plus_);
        out.minus = solve(Sign::Minus, k, jc, warm_minus_);
        out.f_plus = -out.plus.value;
        out.f_minus = -out.minus.value;
        return out;
    }

private:
    ConeMinimum solve(Sign s, const Cone& k, const JointCharacteristics& jc, std::optional<Vector>& warm) {
        MinimizeOptions mo = opts_.minimize;
        mo.warm_start = warm;
        ConeMinimum m = minimize_g(s, k, model_, jc, mo);
        if (m.status == MinimumStatus::Unbounded) {
            fail(ErrorCode::MinimizerUnbounded,
                 std::string("min of g") + (s == Sign::Plus ? "+" : "-") + " over the cone is unbounded below");
        }
        warm = m.minimizer;
        return m;
    }

    const LevyModel& model_;
    const ConeFn& cone_fn_;
    const OpportunityOptions& opts_;
    std::optional<Vector> warm_plus_;
    std::optional<Vector> warm_minus_;
};

void record(PolicyField& pf, std::size_t i, const StageResult& r) {
    pf.psi_plus[i] = r.plus.minimizer;
    pf.psi_minus[i] = r.minus.minimizer;
    pf.min_plus[i] = r.plus.value;
    pf.min_minus[i] = r.minus.value;
}

void check_level(double v, double t, double min_level) {
    if (!(v > min_level)) {
        fail(ErrorCode::NonPositiveL, "opportunity process reached " + std::to_string(v) + " at t=" + std::to_string(t));
    }
}

}  // namespace

OpportunitySolution solve_opportunity(const LevyModel& model, const ConeFn& cone_fn, int n_steps,
                                      const OpportunityOptions& opts) {
    if (n_steps < 1) fail(ErrorCode::InvalidArgument, "n_steps must be at least 1");
    if (!cone_fn) fail(ErrorCode::InvalidArgument, "cone function is empty");

    const auto n = static_cast<std::size_t>(n_steps);
    OpportunitySolution sol;
    sol.grid.times = uniform_grid(model.horizon(), n_steps);
    sol.grid.l_plus.assign(n + 1, 1.0);
    sol.grid.l_minus.assign(n + 1, 1.0);
    PolicyField& pf = sol.policy;
    pf.times = sol.grid.times;
    pf.psi_plus.resize(n + 1);
    pf.psi_minus.resize(n + 1);
    pf.min_plus.resize(n + 1);
    pf.min_minus.resize(n + 1);

    RightHandSide rhs(model, cone_fn, opts);
    const double dt = model.horizon() / n_steps;
    auto& lp = sol.grid.l_plus;
    auto& lm = sol.grid.l_minus;

    for (std::size_t i = n; i-- > 0;) {
        const double t1 = sol.grid.times[i + 1];
        const double t0 = sol.grid.times[i];
        const StageResult k1 = rhs(t1, lp[i + 1], lm[i + 1]);
        record(pf, i + 1, k1);
        if (opts.scheme == Scheme::Euler) {
            lp[i] = lp[i + 1] - dt * k1.f_plus;
            lm[i] = lm[i + 1] - dt * k1.f_minus;
        } else {
            const double tm = 0.5 * (t0 + t1);
            const StageResult k2 = rhs(tm, lp[i + 1] - 0.5 * dt * k1.f_plus, lm[i + 1] - 0.5 * dt * k1.f_minus);
            const StageResult k3 = rhs(tm, lp[i + 1] - 0.5 * dt * k2.f_plus, lm[i + 1] - 0.5 * dt * k2.f_minus);
            const StageResult k4 = rhs(t0, lp[i + 1] - dt * k3.f_plus, lm[i + 1] - dt * k3.f_minus);
            lp[i] = lp[i + 1] - dt / 6.0 * (k1.f_plus + 2.0 * k2.f_plus + 2.0 * k3.f_plus + k4.f_plus);
            lm[i] = lm[i + 1] - dt / 6.0 * (k1.f_minus + 2.0 * k2.f_minus + 2.0 * k3.f_minus + k4.f_minus);
        }
        check_level(lp[i], t0, opts.min_level);
        check_level(lm[i], t0, opts.min_level);
    }
    record(pf, 0, rhs(sol.grid.times[0], lp[0], lm[0]));
    return sol;
}

UnconstrainedSolution solve_unconstrained(const LevyModel& model, int n_steps, Scheme scheme) {
    if (n_steps < 1) fail(ErrorCode::InvalidArgument, "n_steps must be at least 1");
    UnconstrainedSolution out;
    out.b_bar = model.drift();
    out.c_bar = model.diffusion() + second_moment(model);
    out.adjustment = pseudoinverse(out.c_bar) * out.b_bar;
    const double res = (out.c_bar * out.adjustment - out.b_bar).norm();
    if (res > 1e-10 * (1.0 + out.b_bar.norm())) {
        fail(ErrorCode::MinimizerUnbounded, "drift is not in the range of the modified covariance (residual " +
                                                std::to_string(res) + ")");
    }
    out.rate = out.b_bar.dot(out.adjustment);

    const auto n = static_cast<std::size_t>(n_steps);
    const double dt = model.horizon() / n_steps;
    const double k = out.rate;
    // One backward step of dL/dt = k L is multiplication by a fixed factor.
    const double factor = scheme == Scheme::Euler
                              ? 1.0 - k * dt
                              : 1.0 - k * dt + std::pow(k * dt, 2) / 2.0 - std::pow(k * dt, 3) / 6.0 +
                                    std::pow(k * dt, 4) / 24.0;

    OpportunitySolution& sol = out.solution;
    sol.grid.times = uniform_grid(model.horizon(), n_steps);
    sol.grid.l_plus.assign(n + 1, 1.0);
    for (std::size_t i = n; i-- > 0;) {
        sol.grid.l_plus[i] = sol.grid.l_plus[i + 1] * factor;
        check_level(sol.grid.l_plus[i], sol.grid.times[i], 1e-10);
    }
    sol.grid.l_minus = sol.grid.l_plus;

    PolicyField& pf = sol.policy;
    pf.times = sol.grid.times;
    pf.psi_plus.assign(n + 1, Vector(-out.adjustment));
    pf.psi_minus.assign(n + 1, out.adjustment);
    pf.min_plus.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) pf.min_plus[i] = -k * sol.grid.l_plus[i];
    pf.min_minus = pf.min_plus;
    return out;
}

void write_opportunity_csv(std::ostream& os, const OpportunitySolution& sol) {
    const auto& g = sol.grid;
    const auto& p = sol.policy;
    const Eigen::Index d = p.psi_plus.empty() ? 0 : p.psi_plus.front().size();
    os << "t,L_plus,L_minus,min_g_plus,min_g_minus";
    for (Eigen::Index j = 1; j <= d; ++j) os << ",psi_plus_" << j;
    for (Eigen::Index j = 1; j <= d; ++j) os << ",psi_minus_" << j;
    os << '\n';
    for (std::size_t i = 0; i < g.size(); ++i) {
        os << csv::num(g.times[i]) << ',' << csv::num(g.l_plus[i]) << ',' << csv::num(g.l_minus[i]) << ','
           << csv::num(p.min_plus[i]) << ',' << csv::num(p.min_minus[i]);
        for (Eigen::Index j = 0; j < d; ++j) os << ',' << csv::num(p.psi_plus[i](j));
        for (Eigen::Index j = 0; j < d; ++j) os << ',' << csv::num(p.psi_minus[i](j));
        os << '\n';
    }
}

}  // namespace mvcone
