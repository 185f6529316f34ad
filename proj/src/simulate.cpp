#include "mvcone/simulate.hpp"

#include "mvcone/csv.hpp"
#include "mvcone/errors.hpp"
#include "mvcone/stats.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace mvcone {

namespace {

/// Draws the per-step continuous increment and jump list. Used by both the
/// path sampler and the fused Monte Carlo kernel so that the two consume
/// random numbers in exactly the same order.
class StepSampler {
public:
    StepSampler(const LevyModel& model, double dt) : atoms_(model.jumps()) {
        mean_ = continuous_drift(model) * dt;
        const Eigen::SelfAdjointEigenSolver<Matrix> es(model.diffusion());
        const Vector ev = es.eigenvalues();
        const double top = ev.size() ? std::max(ev.maxCoeff(), 0.0) : 0.0;
        std::vector<Eigen::Index> keep;
        for (Eigen::Index j = 0; j < ev.size(); ++j) {
            if (ev(j) > 1e-14 * top && ev(j) > 0.0) keep.push_back(j);
        }
        factor_.resize(model.dim(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t j = 0; j < keep.size(); ++j) {
            factor_.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(ev(keep[j]) * dt);
        }
        z_.resize(factor_.cols());
        for (const auto& a : atoms_) lambda_dt_.push_back(a.lambda * dt);
    }

    void draw(rng::Stream& rs, Vector& cont, std::vector<int>& jumps) {
        cont = mean_;
        if (factor_.cols() > 0) {
            for (Eigen::Index j = 0; j < z_.size(); ++j) z_(j) = rs.normal();
            cont.noalias() += factor_ * z_;
        }
        jumps.clear();
        for (std::size_t k = 0; k < lambda_dt_.size(); ++k) {
            const std::uint32_t n = rs.poisson(lambda_dt_[k]);
            for (std::uint32_t j = 0; j < n; ++j) jumps.push_back(static_cast<int>(k));
        }
    }

    const std::vector<JumpAtom>& atoms() const noexcept { return atoms_; }

private:
    const std::vector<JumpAtom>& atoms_;
    Vector mean_;
    Matrix factor_;
    Vector z_;
    std::vector<double> lambda_dt_;
};

std::vector<double> uniform_times(double horizon, int n) {
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = horizon * static_cast<double>(i) / n;
    t.back() = horizon;
    return t;
}

/// One wealth step with holdings fixed by the pre-step sign of V. Returns
/// true when V was absorbed at zero during the step.
bool wealth_step(double& v, const Vector& psi_plus, const Vector& psi_minus, const Vector& cont,
                 const std::vector<int>& jumps, const std::vector<JumpAtom>& atoms, double threshold) {
    if (v == 0.0) return true;
    const Vector& psi = v > 0.0 ? psi_plus : psi_minus;
    const double size = std::abs(v);
    v += size * psi.dot(cont);
    if (std::abs(v) <= threshold) {
        v = 0.0;
        return true;
    }
    for (int k : jumps) {
        v += size * psi.dot(atoms[static_cast<std::size_t>(k)].u);
        if (std::abs(v) <= threshold) {
            v = 0.0;
            return true;
        }
    }
    return false;
}

void check_policy_grid(const PolicyField& policy, std::size_t n_steps, double horizon) {
    if (policy.size() != n_steps + 1) {
        fail(ErrorCode::GridMismatch, "policy has " + std::to_string(policy.size()) + " grid points, path has " +
                                          std::to_string(n_steps + 1));
    }
    if (std::abs(policy.times.back() - horizon) > 1e-12 * (1.0 + horizon)) {
        fail(ErrorCode::GridMismatch, "policy horizon differs from model horizon");
    }
}

double path_terminal_wealth(const LevyModel& model, const PolicyField& policy, double x, std::uint64_t seed,
                            std::uint64_t stream, double dt) {
    StepSampler sampler(model, dt);
    rng::Stream rs(seed, stream);
    Vector cont;
    std::vector<int> jumps;
    double v = x;
    const double threshold = kAbsorptionTolerance * std::abs(x);
    const std::size_t n = policy.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        sampler.draw(rs, cont, jumps);
        if (wealth_step(v, policy.psi_plus[i], policy.psi_minus[i], cont, jumps, sampler.atoms(), threshold)) {
            return 0.0;
        }
    }
    return v;
}

double square(double a) { return a * a; }

}  // namespace

MarketPath sample_path(const LevyModel& model, int n_steps, std::uint64_t seed, std::uint64_t stream) {
    if (n_steps < 1) fail(ErrorCode::InvalidArgument, "n_steps must be at least 1");
    const double dt = model.horizon() / n_steps;
    StepSampler sampler(model, dt);
    rng::Stream rs(seed, stream);
    MarketPath path;
    path.times = uniform_times(model.horizon(), n_steps);
    const auto n = static_cast<std::size_t>(n_steps);
    path.continuous.resize(n);
    path.jumps.resize(n);
    path.s.assign(n + 1, Vector::Zero(model.dim()));
    path.atoms = model.jumps();
    for (std::size_t i = 0; i < n; ++i) {
        sampler.draw(rs, path.continuous[i], path.jumps[i]);
        path.s[i + 1] = path.s[i] + path.continuous[i];
        for (int k : path.jumps[i]) path.s[i + 1] += model.jumps()[static_cast<std::size_t>(k)].u;
    }
    return path;
}

WealthPath simulate_wealth(double x, const PolicyField& policy, const MarketPath& path) {
    const std::size_t n = path.n_steps();
    if (policy.size() != n + 1) {
        fail(ErrorCode::GridMismatch, "policy has " + std::to_string(policy.size()) + " grid points, path has " +
                                          std::to_string(n + 1));
    }
    for (std::size_t i = 0; i <= n; ++i) {
        if (std::abs(policy.times[i] - path.times[i]) > 1e-12 * (1.0 + std::abs(path.times[i]))) {
            fail(ErrorCode::GridMismatch, "policy and path times differ at index " + std::to_string(i));
        }
    }
    const Eigen::Index d = path.s.front().size();
    if (policy.psi_plus.front().size() != d) fail(ErrorCode::DimensionMismatch, "policy and path dimensions differ");

    WealthPath w;
    w.times = path.times;
    w.v.assign(n + 1, 0.0);
    w.strategy.assign(n, Vector::Zero(d));
    w.v[0] = x;
    if (x == 0.0) w.absorbed_at = 0;
    const double threshold = kAbsorptionTolerance * std::abs(x);

    for (std::size_t i = 0; i < n; ++i) {
        if (w.absorbed_at) break;
        double v = w.v[i];
        w.strategy[i] = std::abs(v) * (v > 0.0 ? policy.psi_plus[i] : policy.psi_minus[i]);
        if (wealth_step(v, policy.psi_plus[i], policy.psi_minus[i], path.continuous[i], path.jumps[i], path.atoms,
                        threshold)) {
            w.absorbed_at = i + 1;
        }
        w.v[i + 1] = v;
    }
    return w;
}

std::vector<double> terminal_wealth(const LevyModel& model, const PolicyField& policy, double x, int n_paths,
                                    std::uint64_t seed, rng::Purpose purpose, Execution exec) {
    if (n_paths < 1) fail(ErrorCode::InvalidArgument, "number of paths must be at least 1");
    if (policy.size() < 2) fail(ErrorCode::GridMismatch, "policy needs at least one step");
    if (policy.psi_plus.front().size() != model.dim()) {
        fail(ErrorCode::DimensionMismatch, "policy and model dimensions differ");
    }
    const std::size_t n = policy.size() - 1;
    check_policy_grid(policy, n, model.horizon());
    const double dt = model.horizon() / static_cast<double>(n);
    std::vector<double> out(static_cast<std::size_t>(n_paths));
    if (exec == Execution::Serial) {
        for (int p = 0; p < n_paths; ++p) {
            out[static_cast<std::size_t>(p)] =
                path_terminal_wealth(model, policy, x, seed, rng::stream_id(purpose, static_cast<std::uint64_t>(p)), dt);
        }
    } else {
#pragma omp parallel for schedule(static)
        for (int p = 0; p < n_paths; ++p) {
            out[static_cast<std::size_t>(p)] =
                path_terminal_wealth(model, policy, x, seed, rng::stream_id(purpose, static_cast<std::uint64_t>(p)), dt);
        }
    }
    return out;
}

ValueProfile value_process_profile(const LevyModel& model, const OpportunitySolution& sol, double x, int n_paths,
                                   std::uint64_t seed) {
    const std::size_t n = sol.grid.size() - 1;
    const auto np = static_cast<std::size_t>(n_paths);
    std::vector<double> j(np * (n + 1));
#pragma omp parallel for schedule(static)
    for (int p = 0; p < n_paths; ++p) {
        const MarketPath path = sample_path(model, static_cast<int>(n), seed,
                                            rng::stream_id(rng::Purpose::Evaluation, static_cast<std::uint64_t>(p)));
        const WealthPath w = simulate_wealth(x, sol.policy, path);
        for (std::size_t i = 0; i <= n; ++i) {
            const double v = w.v[i];
            j[i * np + static_cast<std::size_t>(p)] =
                v > 0.0 ? v * v * sol.grid.l_plus[i] : v * v * sol.grid.l_minus[i];
        }
    }
    ValueProfile prof;
    for (std::size_t i = 0; i <= n; ++i) {
        const auto m = stats::moments(std::span<const double>(j.data() + i * np, np));
        prof.mean.push_back(m.mean);
        prof.stderr_mean.push_back(m.stderr_mean);
    }
    return prof;
}

MarkowitzSolution markowitz_from_estimate(const OpportunitySolution& base, double x, MarkowitzTarget target,
                                          double e_hat, double e_hat_stderr) {
    if (!std::isfinite(e_hat)) fail(ErrorCode::DegenerateBase, "estimate of E[phi.S_T] is not finite");
    if (e_hat <= 0.0 || e_hat <= 3.0 * e_hat_stderr) {
        fail(ErrorCode::DegenerateBase, "E[phi.S_T] estimate " + std::to_string(e_hat) +
                                            " is not significantly positive (stderr " +
                                            std::to_string(e_hat_stderr) + ")");
    }
    MarkowitzSolution s;
    s.target = target;
    s.x = x;
    s.e_hat = e_hat;
    s.e_hat_stderr = e_hat_stderr;
    if (target.kind == MarkowitzTarget::Kind::Mean) {
        s.scale = (target.value - x) / e_hat;
    } else {
        if (!(target.value > 0.0)) fail(ErrorCode::InvalidArgument, "risk aversion gamma must be positive");
        if (1.0 - e_hat <= 3.0 * e_hat_stderr || 1.0 - e_hat <= 0.0) {
            fail(ErrorCode::DegenerateBase, "1 - E[phi.S_T] is not significantly positive");
        }
        s.scale = (1.0 / target.value) / (1.0 - e_hat);
    }
    s.tilde_m = x + s.scale;
    s.base_policy = base.policy;
    return s;
}

MarkowitzSolution markowitz_from_base(const LevyModel& model, const OpportunitySolution& base, double x,
                                      MarkowitzTarget target, int mc_paths, std::uint64_t seed, Execution exec) {
    std::vector<double> gains = terminal_wealth(model, base.policy, -1.0, mc_paths, seed, rng::Purpose::Estimation, exec);
    for (double& g : gains) g += 1.0;
    const auto m = stats::moments(gains);
    return markowitz_from_estimate(base, x, target, m.mean, m.stderr_mean);
}

std::vector<FrontierRow> efficient_frontier(const LevyModel& model, const OpportunitySolution& base, double x,
                                            const std::vector<double>& m_grid, int mc_paths, std::uint64_t seed,
                                            Execution exec) {
    const MarkowitzSolution ms = markowitz_from_base(model, base, x, MarkowitzTarget::mean(x + 1.0), mc_paths, seed, exec);
    std::vector<double> gains = terminal_wealth(model, base.policy, -1.0, mc_paths, seed, rng::Purpose::Evaluation, exec);
    for (double& g : gains) g += 1.0;
    const auto gm = stats::moments(gains);
    std::vector<double> centered4(gains.size());
    for (std::size_t p = 0; p < gains.size(); ++p) centered4[p] = square(square(gains[p] - gm.mean));
    const double mu4 = stats::pairwise_sum(centered4) / static_cast<double>(gains.size());
    const double n = static_cast<double>(gains.size());
    const double rel_e = ms.e_hat_stderr / ms.e_hat;

    std::vector<FrontierRow> rows;
    std::vector<double> vt(gains.size());
    for (double m : m_grid) {
        FrontierRow r;
        r.m = m;
        r.scale = (m - x) / ms.e_hat;
        for (std::size_t p = 0; p < gains.size(); ++p) vt[p] = x + r.scale * gains[p];
        const auto vm = stats::moments(vt);
        r.mean = vm.mean;
        r.variance = vm.variance;
        // Delta method over the two independent sample means (evaluation gains and e_hat).
        const double ratio = gm.mean / ms.e_hat;
        r.stderr_mean = std::abs(m - x) / ms.e_hat * std::sqrt(square(gm.stderr_mean) + square(ratio * ms.e_hat_stderr));
        const double var_rel_sq =
            gm.variance > 0.0 ? std::max(mu4 - square(gm.variance), 0.0) / n / square(gm.variance) : 0.0;
        r.stderr_variance = vm.variance * std::sqrt(var_rel_sq + 4.0 * square(rel_e));
        rows.push_back(r);
    }
    return rows;
}

void write_frontier_csv(std::ostream& os, const std::vector<FrontierRow>& rows) {
    os << "m,mean,variance,stderr\n";
    for (const auto& r : rows) {
        os << csv::num(r.m) << ',' << csv::num(r.mean) << ',' << csv::num(r.variance) << ',' << csv::num(r.stderr_mean)
           << '\n';
    }
}

}  // namespace mvcone
