#include "mvcone/simulate.hpp"

#include "mvcone/rng.hpp"
#include "mvcone/stats.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

using namespace mvcone;
using namespace mvcone::testing;

namespace {

OpportunitySolution full_space_solution(const LevyModel& m, int n) {
    return solve_opportunity(m, constant_cone(Cone::full_space(m.dim())), n);
}

}  // namespace

// Reference outputs of Philox4x32-10 published with the Random123 library.
TEST(Philox, KnownAnswerVectors) {
    using rng::Block;
    EXPECT_EQ(rng::philox4x32_10({0, 0, 0, 0}, {0, 0}), (Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(rng::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
              (Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(rng::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
              (Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, StreamLayout) {
    rng::Stream s(0x0000000500000007ull, 0x0000000300000002ull);
    const auto expected = rng::philox4x32_10({1, 0, 2, 3}, {7, 5});
    for (int i = 0; i < 4; ++i) s.next_u32();  // block 0
    for (int i = 0; i < 4; ++i) EXPECT_EQ(s.next_u32(), expected[i]);
    EXPECT_NE(rng::stream_id(rng::Purpose::Estimation, 4), rng::stream_id(rng::Purpose::Evaluation, 4));
}

TEST(Philox, VariateMoments) {
    rng::Stream s(11, 0);
    std::vector<double> u(200000), z(200000), p(200000);
    for (auto& v : u) v = s.uniform();
    for (auto& v : z) v = s.normal();
    for (auto& v : p) v = s.poisson(23.5);
    EXPECT_GT(*std::min_element(u.begin(), u.end()), 0.0);
    EXPECT_LT(*std::max_element(u.begin(), u.end()), 1.0);
    const auto mu = stats::moments(u), mz = stats::moments(z), mp = stats::moments(p);
    EXPECT_NEAR(mu.mean, 0.5, 4 * mu.stderr_mean);
    EXPECT_NEAR(mu.variance, 1.0 / 12.0, 1e-3);
    EXPECT_NEAR(mz.mean, 0.0, 4 * mz.stderr_mean);
    EXPECT_NEAR(mz.variance, 1.0, 0.01);
    EXPECT_NEAR(mp.mean, 23.5, 4 * mp.stderr_mean);
    EXPECT_NEAR(mp.variance, 23.5, 0.3);
}

TEST(Stats, PairwiseSumAndMoments) {
    std::vector<double> x(1000);
    std::iota(x.begin(), x.end(), 1.0);
    EXPECT_EQ(stats::pairwise_sum(x), 500500.0);
    const auto m = stats::moments(std::vector<double>{1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_DOUBLE_EQ(m.variance, 5.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.stderr_mean, std::sqrt(5.0 / 12.0));
}

TEST(SamplePath, PureDriftIsDeterministic) {
    const LevyModel m = build_levy_model(1, vec({1.0}), Matrix::Zero(1, 1), {}, 1.0);
    const auto a = sample_path(m, 100, 1, 0);
    const auto b = sample_path(m, 100, 2, 9);
    EXPECT_NEAR(a.s.back()(0), 1.0, 1e-12);
    EXPECT_EQ(a.s.back()(0), b.s.back()(0));
    EXPECT_EQ(a.times.size(), 101u);
    EXPECT_ERROR_CODE(sample_path(m, 0, 1), ErrorCode::InvalidArgument);
}

TEST(SamplePath, ReproducibleAndStreamDependent) {
    std::mt19937_64 gen(3);
    const LevyModel m = random_model(gen, 2, true, true);
    const auto a = sample_path(m, 50, 77, 5), b = sample_path(m, 50, 77, 5), c = sample_path(m, 50, 77, 6);
    EXPECT_EQ(a.s.back(), b.s.back());
    EXPECT_NE(a.s.back(), c.s.back());
}

TEST(SamplePath, PoissonJumpCount) {
    const LevyModel m = poisson();
    double total = 0.0;
    const int paths = 100000;
    for (int p = 0; p < paths; ++p) {
        const auto path = sample_path(m, 20, 2024, static_cast<std::uint64_t>(p));
        for (const auto& j : path.jumps) total += static_cast<double>(j.size());
        EXPECT_EQ(path.s.back()(0), static_cast<double>(std::accumulate(path.jumps.begin(), path.jumps.end(), std::size_t{0},
                                                                        [](std::size_t acc, const auto& j) { return acc + j.size(); })));
    }
    EXPECT_NEAR(total / paths, 1.0, 0.01);
}

TEST(SamplePath, BrownianIncrementLaw) {
    const LevyModel m = black_scholes(0.08, 0.04);
    std::vector<double> st(40000);
    for (std::size_t p = 0; p < st.size(); ++p) st[p] = sample_path(m, 10, 9, p).s.back()(0);
    const auto mo = stats::moments(st);
    EXPECT_NEAR(mo.mean, 0.08, 4 * mo.stderr_mean);
    EXPECT_NEAR(mo.variance, 0.04, 0.0015);
}

TEST(Wealth, ZeroPolicyKeepsWealth) {
    const LevyModel m = black_scholes();
    auto sol = solve_opportunity(m, constant_cone(Cone::zero(1)), 10);
    const auto w = simulate_wealth(3.5, sol.policy, sample_path(m, 10, 1));
    for (double v : w.v) EXPECT_EQ(v, 3.5);
    EXPECT_FALSE(w.absorbed_at.has_value());
    EXPECT_EQ(w.strategy.size(), 10u);
}

TEST(Wealth, PoissonBaseStrategyAbsorbsAtFirstJump) {
    const LevyModel m = poisson();
    const auto sol = full_space_solution(m, 50);
    int absorbed = 0;
    for (std::uint64_t p = 0; p < 200; ++p) {
        const auto path = sample_path(m, 50, 5, p);
        const auto w = simulate_wealth(-1.0, sol.policy, path);
        std::size_t first_jump = path.n_steps();
        for (std::size_t i = 0; i < path.n_steps(); ++i) {
            if (!path.jumps[i].empty()) {
                first_jump = i;
                break;
            }
        }
        for (std::size_t i = 0; i < path.n_steps(); ++i) {
            if (i <= first_jump) {
                EXPECT_EQ(w.strategy[i](0), 1.0);
                EXPECT_EQ(w.v[i], -1.0);
            } else {
                EXPECT_EQ(w.strategy[i](0), 0.0);
            }
        }
        if (first_jump < path.n_steps()) {
            ++absorbed;
            ASSERT_TRUE(w.absorbed_at.has_value());
            EXPECT_EQ(*w.absorbed_at, first_jump + 1);
            EXPECT_EQ(w.v.back(), 0.0);
        } else {
            EXPECT_EQ(w.v.back(), -1.0);
        }
    }
    EXPECT_GT(absorbed, 100);
}

TEST(Wealth, AbsorbedAtStartWhenZero) {
    const LevyModel m = black_scholes();
    const auto sol = full_space_solution(m, 10);
    const auto w = simulate_wealth(0.0, sol.policy, sample_path(m, 10, 1));
    ASSERT_TRUE(w.absorbed_at.has_value());
    EXPECT_EQ(*w.absorbed_at, 0u);
    for (double v : w.v) EXPECT_EQ(v, 0.0);
}

TEST(Wealth, EulerProductForBlackScholes) {
    // Below zero the base strategy is 2|V|, so V_{i+1} = V_i (1 − 2ΔS_i).
    const LevyModel m = black_scholes(0.08, 0.04);
    const auto sol = full_space_solution(m, 100);
    for (std::uint64_t p = 0; p < 20; ++p) {
        const auto path = sample_path(m, 100, 8, p);
        const auto w = simulate_wealth(-1.0, sol.policy, path);
        double v = -1.0;
        for (std::size_t i = 0; i < path.n_steps(); ++i) v *= 1.0 - 2.0 * path.continuous[i](0);
        EXPECT_NEAR(w.v.back(), v, 1e-10 * std::abs(v));
        // Compare with the exact geometric Brownian motion on the same increments.
        const double gbm = -std::exp(-2.0 * path.s.back()(0) - 2.0 * 0.04);
        EXPECT_NEAR(w.v.back(), gbm, 0.05 * std::abs(gbm));
    }
}

TEST(Wealth, GridMismatch) {
    const LevyModel m = black_scholes();
    const auto sol = full_space_solution(m, 10);
    EXPECT_ERROR_CODE(simulate_wealth(1.0, sol.policy, sample_path(m, 20, 1)), ErrorCode::GridMismatch);
    const LevyModel m2 = black_scholes(0.08, 0.04, 2.0);
    EXPECT_ERROR_CODE(simulate_wealth(1.0, sol.policy, sample_path(m2, 10, 1)), ErrorCode::GridMismatch);
}

TEST(Wealth, SerialAndParallelAgreeBitwise) {
    std::mt19937_64 gen(17);
    const LevyModel m = random_model(gen, 2, true, true);
    const auto sol = solve_opportunity(m, constant_cone(Cone::orthant(2)), 40);
    const auto a = terminal_wealth(m, sol.policy, -1.0, 3000, 99, rng::Purpose::Evaluation, Execution::Serial);
    const auto b = terminal_wealth(m, sol.policy, -1.0, 3000, 99, rng::Purpose::Evaluation, Execution::Parallel);
    EXPECT_EQ(a, b);
    const auto c = terminal_wealth(m, sol.policy, -1.0, 3000, 99, rng::Purpose::Estimation, Execution::Serial);
    EXPECT_NE(a, c);
}

TEST(Wealth, BlackScholesMeanMatchesOpportunity) {
    const LevyModel m = black_scholes(0.08, 0.04);
    const auto sol = full_space_solution(m, 200);
    const auto vt = terminal_wealth(m, sol.policy, -1.0, 40000, 3);
    const auto mo = stats::moments(vt);
    // E[V_T] = −L(0) for the base problem; the Euler bias is O(Δt).
    EXPECT_NEAR(mo.mean, -sol.grid.l_plus[0], 4 * mo.stderr_mean + 1e-3);
}

TEST(Wealth, ValueProcessIsMartingaleUnderOptimalPolicy) {
    const LevyModel m = black_scholes(0.08, 0.04);
    const auto sol = full_space_solution(m, 100);
    const auto prof = value_process_profile(m, sol, 1.0, 20000, 12);
    ASSERT_EQ(prof.mean.size(), 101u);
    EXPECT_NEAR(prof.mean[0], sol.grid.l_plus[0], 1e-15);
    for (std::size_t i = 0; i < prof.mean.size(); i += 10) {
        EXPECT_NEAR(prof.mean[i], prof.mean[0], 4 * prof.stderr_mean[i] + 2e-3) << "i=" << i;
    }
}

TEST(Markowitz, PoissonBaseConstant) {
    const LevyModel m = poisson();
    const auto base = full_space_solution(m, 100);
    const auto mk = markowitz_from_base(m, base, 0.0, MarkowitzTarget::mean(1.0), 100000, 7);
    const double e = 1.0 - std::exp(-1.0);
    EXPECT_NEAR(mk.e_hat, e, 4 * mk.e_hat_stderr);
    EXPECT_NEAR(mk.e_hat_stderr, std::sqrt(std::exp(-1.0) * e / 100000), 1e-5);
    EXPECT_DOUBLE_EQ(mk.scale, 1.0 / mk.e_hat);
    EXPECT_DOUBLE_EQ(mk.tilde_m, mk.scale);
}

TEST(Markowitz, TargetEqualToWealthMeansNoTrading) {
    const LevyModel m = poisson();
    const auto base = full_space_solution(m, 50);
    const auto mk = markowitz_from_estimate(base, 2.0, MarkowitzTarget::mean(2.0), 0.6);
    EXPECT_EQ(mk.scale, 0.0);
    EXPECT_EQ(mk.tilde_m, 2.0);
    EXPECT_EQ(mk.wealth_from_base(-0.3), 2.0);
}

TEST(Markowitz, RiskAversionHomogeneity) {
    const LevyModel m = poisson();
    const auto base = full_space_solution(m, 50);
    const double s1 = markowitz_from_estimate(base, 0.0, MarkowitzTarget::risk_aversion(1.0), 0.6).scale;
    for (double g : {0.5, 2.0, 7.0}) {
        EXPECT_NEAR(markowitz_from_estimate(base, 0.0, MarkowitzTarget::risk_aversion(g), 0.6).scale * g, s1, 1e-15);
    }
    EXPECT_DOUBLE_EQ(s1, 1.0 / 0.4);
}

TEST(Markowitz, DegenerateBaseRejected) {
    const LevyModel m = poisson();
    const auto base = full_space_solution(m, 50);
    EXPECT_ERROR_CODE(markowitz_from_estimate(base, 0.0, MarkowitzTarget::mean(1.0), 0.0), ErrorCode::DegenerateBase);
    EXPECT_ERROR_CODE(markowitz_from_estimate(base, 0.0, MarkowitzTarget::mean(1.0), 0.01, 0.01),
                      ErrorCode::DegenerateBase);
    EXPECT_ERROR_CODE(markowitz_from_estimate(base, 0.0, MarkowitzTarget::risk_aversion(1.0), 1.0),
                      ErrorCode::DegenerateBase);
    const LevyModel flat = build_levy_model(1, vec({0.0}), mat({{0.04}}), {}, 1.0);
    EXPECT_ERROR_CODE(markowitz_from_base(flat, full_space_solution(flat, 20), 0.0, MarkowitzTarget::mean(1.0), 2000, 1),
                      ErrorCode::DegenerateBase);
}

TEST(Frontier, PoissonVarianceAndMean) {
    const LevyModel m = poisson();
    const auto base = full_space_solution(m, 100);
    const std::vector<double> grid{0.0, 0.5, 1.0, 2.0};
    const auto rows = efficient_frontier(m, base, 0.0, grid, 100000, 21);
    ASSERT_EQ(rows.size(), grid.size());
    EXPECT_EQ(rows[0].variance, 0.0);
    const double slope = std::exp(-1.0) / (1.0 - std::exp(-1.0));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_NEAR(rows[i].mean, grid[i], 3 * rows[i].stderr_mean + 1e-12);
        // Mean and variance pick up the error of ê as well as the sampling error.
        EXPECT_NEAR(rows[i].variance, slope * grid[i] * grid[i], 0.03 * slope * grid[i] * grid[i]);
        // Standard deviation is linear in |m − x| on common paths.
        EXPECT_NEAR(rows[i].variance / (grid[i] * grid[i]), rows[1].variance / (grid[1] * grid[1]), 1e-12);
    }
}

TEST(Frontier, CsvLayout) {
    std::ostringstream os;
    write_frontier_csv(os, {{1.0, 1.0, 0.5, 0.01, 0.02, 2.0}});
    EXPECT_EQ(os.str(), "m,mean,variance,stderr\n1,1,0.5,0.01\n");
}
