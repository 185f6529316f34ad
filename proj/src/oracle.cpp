#include "mvcone/oracle.hpp"

#include "mvcone/csv.hpp"
#include "mvcone/errors.hpp"
#include "mvcone/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>

namespace mvcone {

QuadratureRule gauss_hermite(int n) {
    if (n < 1) fail(ErrorCode::InvalidArgument, "gauss_points must be at least 1");
    Matrix jac = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(static_cast<double>(k));
    const Eigen::SelfAdjointEigenSolver<Matrix> es(jac);
    QuadratureRule q;
    q.nodes.resize(static_cast<std::size_t>(n));
    q.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        q.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        q.weights[static_cast<std::size_t>(i)] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    }
    // Enforce the exact symmetry of the rule so that odd moments vanish.
    for (int i = 0; i < n / 2; ++i) {
        const auto a = static_cast<std::size_t>(i);
        const auto b = static_cast<std::size_t>(n - 1 - i);
        const double x = 0.5 * (q.nodes[b] - q.nodes[a]);
        const double w = 0.5 * (q.weights[a] + q.weights[b]);
        q.nodes[a] = -x;
        q.nodes[b] = x;
        q.weights[a] = q.weights[b] = w;
    }
    if (n % 2 == 1) q.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    const double total = stats::pairwise_sum(q.weights);
    for (double& w : q.weights) w /= total;
    return q;
}

ScenarioTree make_tree(int dim, int n_steps, double horizon, std::vector<TreeAtom> atoms) {
    if (n_steps < 1) fail(ErrorCode::InvalidArgument, "n_steps must be at least 1");
    if (!(horizon > 0.0)) fail(ErrorCode::NonpositiveHorizon, "tree horizon must be positive");
    if (atoms.empty()) fail(ErrorCode::InvalidArgument, "tree needs at least one atom");
    std::vector<double> p;
    for (const auto& a : atoms) {
        if (a.ds.size() != dim) fail(ErrorCode::DimensionMismatch, "tree atom has wrong dimension");
        if (!(a.prob > 0.0)) fail(ErrorCode::InvalidArgument, "tree atom probabilities must be positive");
        p.push_back(a.prob);
    }
    if (std::abs(stats::pairwise_sum(p) - 1.0) > 1e-12) {
        fail(ErrorCode::InvalidArgument, "tree atom probabilities must sum to one");
    }
    ScenarioTree t;
    t.dim = dim;
    t.n_steps = n_steps;
    t.horizon = horizon;
    t.atoms = std::move(atoms);
    return t;
}

ScenarioTree discretize(const LevyModel& model, int n_steps, int gauss_points) {
    if (n_steps < 1) fail(ErrorCode::InvalidArgument, "n_steps must be at least 1");
    const double dt = model.horizon() / n_steps;
    double jump_mass = 0.0;
    for (const auto& a : model.jumps()) jump_mass += a.lambda * dt;
    if (jump_mass >= 1.0) {
        fail(ErrorCode::StepTooCoarse, "total jump probability per step " + std::to_string(jump_mass) +
                                           " is not below one; increase n_steps");
    }
    const QuadratureRule gh = gauss_hermite(gauss_points);

    // Diffusion factors with nonzero variance.
    const Eigen::SelfAdjointEigenSolver<Matrix> es(model.diffusion());
    const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
    std::vector<Vector> factors;
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
        const double ev = es.eigenvalues()(j);
        if (ev > 0.0 && ev > 1e-14 * top) factors.push_back(es.eigenvectors().col(j) * std::sqrt(ev * dt));
    }

    // Tensor-product Gaussian atoms.
    std::vector<TreeAtom> gauss{{Vector::Zero(model.dim()), 1.0}};
    for (const Vector& f : factors) {
        std::vector<TreeAtom> next;
        for (const auto& a : gauss) {
            for (std::size_t q = 0; q < gh.nodes.size(); ++q) {
                next.push_back({a.ds + gh.nodes[q] * f, a.prob * gh.weights[q]});
            }
        }
        gauss = std::move(next);
    }

    const Vector drift = continuous_drift(model) * dt;
    std::vector<TreeAtom> atoms;
    for (const auto& g : gauss) {
        atoms.push_back({g.ds + drift, g.prob * (1.0 - jump_mass)});
        for (const auto& j : model.jumps()) atoms.push_back({g.ds + drift + j.u, g.prob * j.lambda * dt});
    }

    // Recenter so that the one-step mean is exactly b Δt.
    const Vector target = model.drift() * dt;
    for (int pass = 0; pass < 2; ++pass) {
        Vector mean = Vector::Zero(model.dim());
        for (Eigen::Index c = 0; c < model.dim(); ++c) {
            std::vector<double> terms;
            for (const auto& a : atoms) terms.push_back(a.prob * a.ds(c));
            mean(c) = stats::pairwise_sum(terms);
        }
        const Vector shift = target - mean;
        if (shift.isZero(0.0)) break;
        for (auto& a : atoms) a.ds += shift;
    }
    return make_tree(model.dim(), n_steps, model.horizon(), std::move(atoms));
}

namespace {

/// One-period DP objective f(ψ) = Σ p [ (w⁺)² L_own + (w⁻)² L_other ], w = 1 + sψᵀΔs.
class OneStepObjective final : public PiecewiseQuadratic {
public:
    OneStepObjective(const ScenarioTree& tree, double sign, double l_own, double l_other)
        : tree_(tree), s_(sign), l_own_(l_own), l_other_(l_other), terms_(tree.atoms.size()) {}

    int dim() const override { return tree_.dim; }

    double value(const Vector& psi, Vector* grad) const override {
        if (grad) grad->setZero(tree_.dim);
        for (std::size_t a = 0; a < tree_.atoms.size(); ++a) {
            const auto& at = tree_.atoms[a];
            const double w = 1.0 + s_ * psi.dot(at.ds);
            const double wp = std::max(w, 0.0);
            const double wn = std::max(-w, 0.0);
            terms_[a] = at.prob * (wp * wp * l_own_ + wn * wn * l_other_);
            if (grad) *grad += (2.0 * s_ * at.prob * (wp * l_own_ - wn * l_other_)) * at.ds;
        }
        return stats::pairwise_sum(terms_);
    }

    void piece(const Vector& psi, Matrix& hessian, Vector& linear) const override {
        hessian = Matrix::Zero(tree_.dim, tree_.dim);
        linear = Vector::Zero(tree_.dim);
        for (const auto& at : tree_.atoms) {
            const double w = 1.0 + s_ * psi.dot(at.ds);
            const double kappa = w >= 0.0 ? l_own_ : l_other_;
            hessian.noalias() += (2.0 * at.prob * kappa) * at.ds * at.ds.transpose();
            linear += (2.0 * s_ * at.prob * kappa) * at.ds;
        }
    }

    Vector kink_arguments(const Vector& psi) const override {
        Vector w(static_cast<Eigen::Index>(tree_.atoms.size()));
        for (std::size_t a = 0; a < tree_.atoms.size(); ++a) {
            w(static_cast<Eigen::Index>(a)) = 1.0 + s_ * psi.dot(tree_.atoms[a].ds);
        }
        return w;
    }

    bool is_quadratic() const override { return false; }

private:
    const ScenarioTree& tree_;
    double s_;
    double l_own_;
    double l_other_;
    mutable std::vector<double> terms_;
};

void require_solved(const ScenarioTree& tree) {
    if (!tree.solved()) fail(ErrorCode::InvalidArgument, "scenario tree has not been solved");
}

void require_policy(const ScenarioTree& tree, const TreePolicy& policy) {
    const auto n = static_cast<std::size_t>(tree.n_steps);
    if (policy.psi_plus.size() != n || policy.psi_minus.size() != n) {
        fail(ErrorCode::GridMismatch, "tree policy length differs from the number of steps");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (policy.psi_plus[i].size() != tree.dim || policy.psi_minus[i].size() != tree.dim) {
            fail(ErrorCode::DimensionMismatch, "tree policy has wrong dimension");
        }
    }
}

constexpr std::size_t kMaxNodes = 20'000'000;

std::size_t node_count(const ScenarioTree& tree) {
    double total = 1.0;
    double level = 1.0;
    for (int i = 0; i < tree.n_steps; ++i) {
        level *= static_cast<double>(tree.atoms.size());
        total += level;
    }
    if (total > static_cast<double>(kMaxNodes)) {
        fail(ErrorCode::InvalidArgument, "tree too large to enumerate (" + std::to_string(total) + " nodes)");
    }
    return static_cast<std::size_t>(total);
}

/// Wealth after one step under the feedback policy, with absorption at 0.
double next_wealth(double v, const Vector& psi_plus, const Vector& psi_minus, const Vector& ds, double threshold) {
    if (v == 0.0) return 0.0;
    const Vector& psi = v > 0.0 ? psi_plus : psi_minus;
    const double out = v + std::abs(v) * psi.dot(ds);
    return std::abs(out) <= threshold ? 0.0 : out;
}

double j_value(double v, double lp, double lm) { return v > 0.0 ? v * v * lp : v * v * lm; }

}  // namespace

double one_step_value(const ScenarioTree& tree, double sign, const Vector& psi, double l_own, double l_other) {
    return OneStepObjective(tree, sign, l_own, l_other).value(psi, nullptr);
}

TreePolicy dp_backward(ScenarioTree& tree, const ConeFn& cone_fn, const MinimizeOptions& opts) {
    const auto n = static_cast<std::size_t>(tree.n_steps);
    tree.l_plus.assign(n + 1, 1.0);
    tree.l_minus.assign(n + 1, 1.0);
    TreePolicy pol;
    pol.psi_plus.resize(n);
    pol.psi_minus.resize(n);
    const double dt = tree.dt();
    for (std::size_t i = n; i-- > 0;) {
        const Cone k = cone_fn(dt * static_cast<double>(i));
        if (k.dim() != tree.dim) fail(ErrorCode::DimensionMismatch, "cone dimension differs from tree");
        for (const double s : {1.0, -1.0}) {
            const double l_own = s > 0 ? tree.l_plus[i + 1] : tree.l_minus[i + 1];
            const double l_other = s > 0 ? tree.l_minus[i + 1] : tree.l_plus[i + 1];
            const OneStepObjective f(tree, s, l_own, l_other);
            MinimizeOptions mo = opts;
            if (i + 1 < n) mo.warm_start = s > 0 ? pol.psi_plus[i + 1] : pol.psi_minus[i + 1];
            const ConeMinimum m = minimize_on_cone(f, k, mo);
            if (m.status == MinimumStatus::Unbounded) {
                fail(ErrorCode::MinimizerUnbounded, "one-step problem at step " + std::to_string(i) + " is unbounded");
            }
            (s > 0 ? pol.psi_plus[i] : pol.psi_minus[i]) = m.minimizer;
            (s > 0 ? tree.l_plus[i] : tree.l_minus[i]) = f.value(m.minimizer, nullptr);
        }
    }
    return pol;
}

TreePolicy dp_backward(ScenarioTree& tree, const Cone& cone, const MinimizeOptions& opts) {
    return dp_backward(tree, constant_cone(cone), opts);
}

namespace {

struct NodeList {
    std::vector<int> step;
    std::vector<double> wealth;
    std::vector<double> drift;

    void append(const NodeList& o) {
        step.insert(step.end(), o.step.begin(), o.step.end());
        wealth.insert(wealth.end(), o.wealth.begin(), o.wealth.end());
        drift.insert(drift.end(), o.drift.begin(), o.drift.end());
    }
};

/// Records the node (i, v) and returns its children.
std::vector<double> expand(const ScenarioTree& tree, const TreePolicy& policy, int i, double v, double threshold,
                           NodeList& out) {
    const auto ui = static_cast<std::size_t>(i);
    std::vector<double> children(tree.atoms.size());
    std::vector<double> terms(tree.atoms.size());
    for (std::size_t a = 0; a < tree.atoms.size(); ++a) {
        children[a] = next_wealth(v, policy.psi_plus[ui], policy.psi_minus[ui], tree.atoms[a].ds, threshold);
        terms[a] = tree.atoms[a].prob * j_value(children[a], tree.l_plus[ui + 1], tree.l_minus[ui + 1]);
    }
    out.step.push_back(i);
    out.wealth.push_back(v);
    out.drift.push_back(stats::pairwise_sum(terms) - j_value(v, tree.l_plus[ui], tree.l_minus[ui]));
    return children;
}

void visit_subtree(const ScenarioTree& tree, const TreePolicy& policy, int i, double v, double threshold,
                   NodeList& out) {
    if (i == tree.n_steps) return;
    for (double c : expand(tree, policy, i, v, threshold, out)) visit_subtree(tree, policy, i + 1, c, threshold, out);
}

}  // namespace

MartingaleReport check_martingale_optimality(const ScenarioTree& tree, const TreePolicy& policy, double x,
                                             double positive_tol, Execution exec) {
    require_solved(tree);
    require_policy(tree, policy);
    node_count(tree);
    const double threshold = 1e-14 * std::abs(x);

    NodeList all;
    if (exec == Execution::Serial) {
        visit_subtree(tree, policy, 0, x, threshold, all);
    } else {
        const std::vector<double> roots = expand(tree, policy, 0, x, threshold, all);
        std::vector<NodeList> parts(roots.size());
#pragma omp parallel for schedule(dynamic)
        for (std::size_t a = 0; a < roots.size(); ++a) visit_subtree(tree, policy, 1, roots[a], threshold, parts[a]);
        for (const auto& p : parts) all.append(p);
    }

    MartingaleReport rep;
    rep.step = std::move(all.step);
    rep.wealth = std::move(all.wealth);
    rep.drift = std::move(all.drift);
    if (!rep.drift.empty()) {
        rep.max_drift = *std::max_element(rep.drift.begin(), rep.drift.end());
        rep.min_drift = *std::min_element(rep.drift.begin(), rep.drift.end());
        rep.max_abs_drift = std::max(std::abs(rep.max_drift), std::abs(rep.min_drift));
        rep.positive_nodes = static_cast<std::size_t>(
            std::count_if(rep.drift.begin(), rep.drift.end(), [&](double d) { return d > positive_tol; }));
    }
    return rep;
}

PolicyValues policy_evaluation(const ScenarioTree& tree, const TreePolicy& policy) {
    require_policy(tree, policy);
    const auto n = static_cast<std::size_t>(tree.n_steps);
    PolicyValues out;
    out.l_plus.assign(n + 1, 1.0);
    out.l_minus.assign(n + 1, 1.0);
    for (std::size_t i = n; i-- > 0;) {
        out.l_plus[i] = one_step_value(tree, 1.0, policy.psi_plus[i], out.l_plus[i + 1], out.l_minus[i + 1]);
        out.l_minus[i] = one_step_value(tree, -1.0, policy.psi_minus[i], out.l_minus[i + 1], out.l_plus[i + 1]);
    }
    if (tree.solved()) {
        out.max_violation = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i <= n; ++i) {
            out.max_violation = std::max({out.max_violation, tree.l_plus[i] - out.l_plus[i], tree.l_minus[i] - out.l_minus[i]});
        }
    }
    return out;
}

TerminalLaw terminal_law(const ScenarioTree& tree, const TreePolicy& policy, double x) {
    require_policy(tree, policy);
    node_count(tree);
    const double threshold = 1e-14 * std::abs(x);
    TerminalLaw law;
    std::function<void(int, double, double)> visit = [&](int i, double v, double p) {
        if (i == tree.n_steps) {
            law.wealth.push_back(v);
            law.prob.push_back(p);
            return;
        }
        const auto ui = static_cast<std::size_t>(i);
        for (const auto& a : tree.atoms) {
            visit(i + 1, next_wealth(v, policy.psi_plus[ui], policy.psi_minus[ui], a.ds, threshold), p * a.prob);
        }
    };
    visit(0, x, 1.0);
    return law;
}

OdeComparison compare_to_ode(const ScenarioTree& tree, const OpportunityGrid& grid) {
    require_solved(tree);
    if (grid.size() < 2) fail(ErrorCode::GridMismatch, "ODE grid is empty");
    const std::size_t big = grid.size() - 1;
    const auto n = static_cast<std::size_t>(tree.n_steps);
    if (big % n != 0) {
        fail(ErrorCode::GridMismatch, "ODE step count " + std::to_string(big) + " is not a multiple of tree step count " +
                                          std::to_string(n));
    }
    if (std::abs(grid.times.back() - tree.horizon) > 1e-12 * (1.0 + tree.horizon)) {
        fail(ErrorCode::GridMismatch, "ODE and tree horizons differ");
    }
    const std::size_t stride = big / n;
    OdeComparison c;
    std::vector<double> sp, sm;
    for (std::size_t i = 0; i <= n; ++i) {
        const double ep = std::abs(tree.l_plus[i] - grid.l_plus[i * stride]);
        const double em = std::abs(tree.l_minus[i] - grid.l_minus[i * stride]);
        c.max_err_plus = std::max(c.max_err_plus, ep);
        c.max_err_minus = std::max(c.max_err_minus, em);
        sp.push_back(ep * ep);
        sm.push_back(em * em);
    }
    c.l2_err_plus = std::sqrt(stats::pairwise_sum(sp) / static_cast<double>(n + 1));
    c.l2_err_minus = std::sqrt(stats::pairwise_sum(sm) / static_cast<double>(n + 1));
    return c;
}

std::vector<ConvergenceRow> convergence_table(const LevyModel& model, const ConeFn& cone_fn,
                                              const OpportunityGrid& grid, const std::vector<int>& ns,
                                              int gauss_points) {
    std::vector<ConvergenceRow> rows;
    for (int n : ns) {
        ScenarioTree tree = discretize(model, n, gauss_points);
        dp_backward(tree, cone_fn);
        const OdeComparison c = compare_to_ode(tree, grid);
        rows.push_back({n, std::max(c.max_err_plus, c.max_err_minus)});
    }
    return rows;
}

void write_tree_csv(std::ostream& os, const ScenarioTree& tree, const TreePolicy& policy) {
    require_solved(tree);
    require_policy(tree, policy);
    const int d = tree.dim;
    os << "step,L_plus,L_minus";
    for (const char* name : {"psi_plus", "psi_minus"}) {
        if (d == 1) {
            os << ',' << name;
        } else {
            for (int j = 1; j <= d; ++j) os << ',' << name << '_' << j;
        }
    }
    os << '\n';
    for (int i = 0; i <= tree.n_steps; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        os << i << ',' << csv::num(tree.l_plus[ui]) << ',' << csv::num(tree.l_minus[ui]);
        for (int side = 0; side < 2; ++side) {
            for (int j = 0; j < d; ++j) {
                os << ',';
                if (i < tree.n_steps) os << csv::num((side == 0 ? policy.psi_plus : policy.psi_minus)[ui](j));
            }
        }
        os << '\n';
    }
}

}  // namespace mvcone
