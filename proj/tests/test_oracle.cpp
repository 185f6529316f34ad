#include "mvcone/oracle.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

using namespace mvcone;
using namespace mvcone::testing;

namespace {

ScenarioTree two_point_tree(double a, double b, int n = 1) {
    return make_tree(1, n, 1.0, {{vec({a}), 0.5}, {vec({b}), 0.5}});
}

Vector one_step_mean(const ScenarioTree& t) {
    Vector m = Vector::Zero(t.dim);
    for (const auto& a : t.atoms) m += a.prob * a.ds;
    return m;
}

}  // namespace

TEST(GaussHermite, MomentsOfStandardNormal) {
    for (int n : {1, 2, 3, 5, 8}) {
        const auto q = gauss_hermite(n);
        ASSERT_EQ(q.nodes.size(), static_cast<std::size_t>(n));
        double m0 = 0, m1 = 0, m2 = 0, m4 = 0, m6 = 0;
        for (int i = 0; i < n; ++i) {
            const double x = q.nodes[static_cast<std::size_t>(i)], w = q.weights[static_cast<std::size_t>(i)];
            EXPECT_GT(w, 0.0);
            EXPECT_NEAR(x, -q.nodes[static_cast<std::size_t>(n - 1 - i)], 1e-14);
            m0 += w;
            m1 += w * x;
            m2 += w * x * x;
            m4 += w * std::pow(x, 4);
            m6 += w * std::pow(x, 6);
        }
        EXPECT_NEAR(m0, 1.0, 1e-14);
        EXPECT_NEAR(m1, 0.0, 1e-14);
        if (n >= 2) EXPECT_NEAR(m2, 1.0, 1e-13);
        if (n >= 3) EXPECT_NEAR(m4, 3.0, 1e-12);
        if (n >= 4) EXPECT_NEAR(m6, 15.0, 1e-11);
    }
    EXPECT_ERROR_CODE(gauss_hermite(0), ErrorCode::InvalidArgument);
}

TEST(Discretize, PoissonAtoms) {
    const auto t = discretize(poisson(), 10, 5);
    ASSERT_EQ(t.atoms.size(), 2u);
    EXPECT_NEAR(t.atoms[0].ds(0), 0.0, 1e-15);
    EXPECT_NEAR(t.atoms[0].prob, 0.9, 1e-15);
    EXPECT_NEAR(t.atoms[1].ds(0), 1.0, 1e-15);
    EXPECT_NEAR(t.atoms[1].prob, 0.1, 1e-15);
    EXPECT_NEAR(one_step_mean(t)(0), 0.1, 1e-14);
    EXPECT_ERROR_CODE(discretize(poisson(), 1, 5), ErrorCode::StepTooCoarse);
    EXPECT_ERROR_CODE(discretize(poisson(), 0, 5), ErrorCode::InvalidArgument);
}

TEST(Discretize, MeanAndCovarianceProperty) {
    std::mt19937_64 gen(61);
    for (int t = 0; t < 10; ++t) {
        const int d = 1 + t % 3;
        const LevyModel m = random_model(gen, d, true, t % 2 == 0);
        const auto tree = discretize(m, 20, 3);
        const double dt = tree.dt();
        EXPECT_LE((one_step_mean(tree) - m.drift() * dt).cwiseAbs().maxCoeff(), 1e-14);
        double total = 0.0;
        for (const auto& a : tree.atoms) total += a.prob;
        EXPECT_NEAR(total, 1.0, 1e-13);
        if (!m.has_jumps()) {
            // Gauss–Hermite is exact for second moments.
            Matrix cov = Matrix::Zero(d, d);
            const Vector mu = one_step_mean(tree);
            for (const auto& a : tree.atoms) cov += a.prob * (a.ds - mu) * (a.ds - mu).transpose();
            EXPECT_LE((cov - m.diffusion() * dt).cwiseAbs().maxCoeff(), 1e-14);
            EXPECT_EQ(tree.atoms.size(), static_cast<std::size_t>(std::pow(3, d)));
        }
    }
}

TEST(MakeTree, Validation) {
    EXPECT_ERROR_CODE(make_tree(1, 1, 1.0, {{vec({1}), 0.5}, {vec({-1}), 0.4}}), ErrorCode::InvalidArgument);
    EXPECT_ERROR_CODE(make_tree(1, 1, 1.0, {{vec({1}), 1.0}, {vec({-1}), 0.0}}), ErrorCode::InvalidArgument);
    EXPECT_ERROR_CODE(make_tree(2, 1, 1.0, {{vec({1}), 1.0}}), ErrorCode::DimensionMismatch);
    EXPECT_ERROR_CODE(make_tree(1, 1, 0.0, {{vec({1}), 1.0}}), ErrorCode::NonpositiveHorizon);
}

TEST(DynamicProgram, TwoPointUnconstrained) {
    auto t = two_point_tree(2.0, -1.0);
    const auto pol = dp_backward(t, Cone::full_space(1));
    EXPECT_NEAR(t.l_plus[0], 0.9, 1e-12);
    EXPECT_NEAR(t.l_minus[0], 0.9, 1e-12);
    EXPECT_NEAR(pol.psi_plus[0](0), -0.2, 1e-9);
    EXPECT_NEAR(pol.psi_minus[0](0), 0.2, 1e-9);
}

TEST(DynamicProgram, TwoPointLongOnly) {
    auto t = two_point_tree(1.0, -2.0);
    const auto pol = dp_backward(t, Cone::orthant(1));
    EXPECT_NEAR(pol.psi_plus[0](0), 0.2, 1e-9);
    EXPECT_NEAR(t.l_plus[0], 0.9, 1e-12);
    EXPECT_EQ(pol.psi_minus[0](0), 0.0);
    EXPECT_EQ(t.l_minus[0], 1.0);
}

TEST(DynamicProgram, SymmetricLawHasNoOpportunity) {
    auto t = two_point_tree(1.0, -1.0, 5);
    const auto pol = dp_backward(t, Cone::full_space(1));
    for (int i = 0; i <= 5; ++i) {
        EXPECT_NEAR(t.l_plus[static_cast<std::size_t>(i)], 1.0, 1e-14);
        EXPECT_NEAR(t.l_minus[static_cast<std::size_t>(i)], 1.0, 1e-14);
    }
    EXPECT_NEAR(pol.psi_plus[0](0), 0.0, 1e-9);
}

TEST(DynamicProgram, SignSwitchingUsesOtherLevel) {
    // ψ = 1 maps V = 1 to 1 + Δs; with Δs = −3 wealth crosses zero and the
    // other level applies. Check one_step_value against a hand computation.
    auto t = two_point_tree(1.0, -3.0);
    const double v = one_step_value(t, 1.0, vec({1.0}), 0.5, 0.8);
    EXPECT_DOUBLE_EQ(v, 0.5 * (4.0 * 0.5) + 0.5 * (4.0 * 0.8));
}

TEST(DynamicProgram, RisklessGainReachesZero) {
    // A sure increment lets V = −1 be closed out exactly in the last step.
    auto t = make_tree(1, 2, 1.0, {{vec({1.0}), 1.0}});
    const auto pol = dp_backward(t, Cone::full_space(1));
    EXPECT_NEAR(pol.psi_minus[1](0), 1.0, 1e-9);
    EXPECT_NEAR(t.l_minus[1], 0.0, 1e-15);
    EXPECT_NEAR(t.l_plus[0], 0.0, 1e-15);
}

TEST(DynamicProgram, TimeDependentCone) {
    auto t = two_point_tree(2.0, -1.0, 4);
    const ConeFn fn = [](double s) { return s < 0.5 ? Cone::zero(1) : Cone::full_space(1); };
    const auto pol = dp_backward(t, fn);
    EXPECT_EQ(pol.psi_plus[0](0), 0.0);
    EXPECT_EQ(pol.psi_plus[1](0), 0.0);
    EXPECT_NEAR(t.l_plus[0], 0.81, 1e-12);
    EXPECT_EQ(t.l_plus[0], t.l_plus[2]);
}

TEST(DynamicProgram, SymmetricConeGivesEqualLevels) {
    std::mt19937_64 gen(67);
    for (int k = 0; k < 4; ++k) {
        const LevyModel m = random_model(gen, 2, true, true);
        auto t = discretize(m, 10, 3);
        const auto pol = dp_backward(t, Cone::full_space(2));
        for (int i = 0; i <= 10; ++i) {
            EXPECT_NEAR(t.l_plus[static_cast<std::size_t>(i)], t.l_minus[static_cast<std::size_t>(i)], 1e-12);
        }
        EXPECT_LE((pol.psi_plus[3] + pol.psi_minus[3]).norm(), 1e-7);
    }
}

class MartingaleTest : public ::testing::Test {
protected:
    void SetUp() override {
        const LevyModel m = build_levy_model(2, vec({0.1, 0.05}), mat({{0.04, 0.01}, {0.01, 0.09}}),
                                             {{vec({-0.3, 0.1}), 0.5}}, 1.0);
        tree = discretize(m, 4, 3);
        policy = dp_backward(tree, Cone::orthant(2));
    }
    ScenarioTree tree;
    TreePolicy policy;
};

TEST_F(MartingaleTest, OptimalPolicyHasZeroDrift) {
    for (double x : {1.0, -1.0, 2.5}) {
        const auto rep = check_martingale_optimality(tree, policy, x);
        EXPECT_EQ(rep.drift.size(), static_cast<std::size_t>(1 + 18 + 18 * 18 + 18 * 18 * 18));
        EXPECT_LE(rep.max_abs_drift, 1e-12 * x * x);
        EXPECT_EQ(rep.positive_nodes, 0u);
    }
}

TEST_F(MartingaleTest, PerturbedPolicyIsSubmartingale) {
    std::mt19937_64 gen(71);
    const Cone k = Cone::orthant(2);
    for (int r = 0; r < 5; ++r) {
        TreePolicy p = policy;
        for (auto& v : p.psi_plus) v = k.project(v + random_vector(gen, 2, 0.5));
        for (auto& v : p.psi_minus) v = k.project(v + random_vector(gen, 2, 0.5));
        const auto rep = check_martingale_optimality(tree, p, -1.0);
        EXPECT_GE(rep.min_drift, -1e-12);
        EXPECT_GT(rep.positive_nodes, 0u);
        const auto pv = policy_evaluation(tree, p);
        EXPECT_LE(pv.max_violation, 1e-12);
        EXPECT_GT(pv.l_minus[0], tree.l_minus[0]);
    }
}

TEST_F(MartingaleTest, ZeroPolicyDriftIsLevelIncrease) {
    TreePolicy p = policy;
    for (auto& v : p.psi_plus) v.setZero();
    for (auto& v : p.psi_minus) v.setZero();
    const auto rep = check_martingale_optimality(tree, p, 1.0);
    for (std::size_t n = 0; n < rep.drift.size(); ++n) {
        const auto i = static_cast<std::size_t>(rep.step[n]);
        EXPECT_EQ(rep.wealth[n], 1.0);
        EXPECT_NEAR(rep.drift[n], tree.l_plus[i + 1] - tree.l_plus[i], 1e-15);
    }
}

TEST_F(MartingaleTest, SerialAndParallelEnumerationAgree) {
    const auto a = check_martingale_optimality(tree, policy, -1.0, 1e-12, Execution::Serial);
    const auto b = check_martingale_optimality(tree, policy, -1.0, 1e-12, Execution::Parallel);
    EXPECT_EQ(a.step, b.step);
    EXPECT_EQ(a.wealth, b.wealth);
    EXPECT_EQ(a.drift, b.drift);
}

TEST_F(MartingaleTest, OptimalPolicyEvaluatesToDpLevels) {
    const auto pv = policy_evaluation(tree, policy);
    for (std::size_t i = 0; i < pv.l_plus.size(); ++i) {
        EXPECT_NEAR(pv.l_plus[i], tree.l_plus[i], 1e-14);
        EXPECT_NEAR(pv.l_minus[i], tree.l_minus[i], 1e-14);
    }
}

TEST_F(MartingaleTest, TerminalSecondMomentEqualsInitialValue) {
    for (double x : {1.0, -2.0}) {
        const auto law = terminal_law(tree, policy, x);
        ASSERT_EQ(law.prob.size(), 18u * 18 * 18 * 18);
        double total = 0.0, second = 0.0;
        for (std::size_t k = 0; k < law.prob.size(); ++k) {
            total += law.prob[k];
            second += law.prob[k] * law.wealth[k] * law.wealth[k];
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
        EXPECT_NEAR(second, x * x * (x > 0 ? tree.l_plus[0] : tree.l_minus[0]), 1e-12 * x * x);
    }
}

TEST_F(MartingaleTest, PolicyShapeChecked) {
    TreePolicy p = policy;
    p.psi_plus.pop_back();
    EXPECT_ERROR_CODE(check_martingale_optimality(tree, p, 1.0), ErrorCode::GridMismatch);
    ScenarioTree unsolved = discretize(build_levy_model(1, vec({0.1}), mat({{0.04}}), {}, 1.0), 4, 3);
    TreePolicy q{std::vector<Vector>(4, vec({0.0})), std::vector<Vector>(4, vec({0.0}))};
    EXPECT_ERROR_CODE(check_martingale_optimality(unsolved, q, 1.0), ErrorCode::InvalidArgument);
}

TEST(Enumeration, NodeLimit) {
    auto t = discretize(build_levy_model(2, vec({0.1, 0.05}), mat({{0.04, 0}, {0, 0.09}}), {}, 1.0), 12, 5);
    const auto pol = dp_backward(t, Cone::full_space(2));
    EXPECT_ERROR_CODE(check_martingale_optimality(t, pol, 1.0), ErrorCode::InvalidArgument);
}

TEST(OdeComparison, BlackScholesAgreement) {
    const LevyModel m = black_scholes(0.08, 0.04);
    const auto ode = solve_opportunity(m, constant_cone(Cone::full_space(1)), 1000);
    auto tree = discretize(m, 20, 5);
    dp_backward(tree, Cone::full_space(1));
    const auto c = compare_to_ode(tree, ode.grid);
    // One-step factor 1 − b²Δt/(c + b²Δt) against e^{−b²Δt/c}.
    EXPECT_LT(c.max_err_plus, 2e-3);
    EXPECT_LE(c.l2_err_plus, c.max_err_plus);
    EXPECT_NEAR(c.max_err_plus, c.max_err_minus, 1e-12);
    const double step = 1.0 - 0.0064 * 0.05 / (0.04 + 0.0064 * 0.05);
    EXPECT_NEAR(tree.l_plus[0], std::pow(step, 20), 1e-12);

    auto coarse = discretize(m, 30, 5);
    dp_backward(coarse, Cone::full_space(1));
    EXPECT_ERROR_CODE(compare_to_ode(coarse, ode.grid), ErrorCode::GridMismatch);
}

TEST(OdeComparison, PoissonFirstOrderConvergence) {
    const LevyModel m = poisson();
    const auto ode = solve_opportunity(m, constant_cone(Cone::full_space(1)), 1600);
    const auto rows = convergence_table(m, constant_cone(Cone::full_space(1)), ode.grid, {20, 40, 80, 160}, 5);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double ratio = rows[i].err / rows[i + 1].err;
        EXPECT_GT(ratio, 1.8);
        EXPECT_LT(ratio, 2.2);
    }
}

TEST(TreeCsv, Layout) {
    auto t = two_point_tree(2.0, -1.0, 2);
    const auto pol = dp_backward(t, Cone::full_space(1));
    std::ostringstream os;
    write_tree_csv(os, t, pol);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "step,L_plus,L_minus,psi_plus,psi_minus");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows.back(), "2,1,1,,");
}
