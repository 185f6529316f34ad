/**
 * @file bench_kernels.cpp
 * @brief Serial reference vs OpenMP versions of the Monte Carlo and tree-enumeration kernels
 *
 * Both variants of each kernel produce bitwise identical output; the
 * benchmark only measures wall time. Set OMP_NUM_THREADS to vary the team size.
 */

#include "mvcone/opportunity.hpp"
#include "mvcone/oracle.hpp"
#include "mvcone/simulate.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

using namespace mvcone;

namespace {

LevyModel jump_diffusion() {
    Matrix c(2, 2);
    c << 0.04, 0.01, 0.01, 0.09;
    Vector b(2);
    b << 0.1, 0.05;
    Vector u1(2), u2(2);
    u1 << -0.3, 0.1;
    u2 << 0.2, 0.2;
    return build_levy_model(2, b, c, {{u1, 0.5}, {u2, 0.3}}, 1.0);
}

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::Serial : Execution::Parallel; }

void BM_TerminalWealth(benchmark::State& state) {
    const LevyModel m = jump_diffusion();
    const auto sol = solve_opportunity(m, constant_cone(Cone::orthant(2)), 100);
    const int paths = static_cast<int>(state.range(1));
    for (auto _ : state) {
        auto v = terminal_wealth(m, sol.policy, -1.0, paths, 7, rng::Purpose::Evaluation, mode(state));
        benchmark::DoNotOptimize(v.data());
    }
    state.SetItemsProcessed(state.iterations() * paths);
    state.SetLabel(state.range(0) == 0 ? "serial" : "omp x" + std::to_string(omp_get_max_threads()));
}

void BM_MartingaleCheck(benchmark::State& state) {
    ScenarioTree tree = discretize(jump_diffusion(), static_cast<int>(state.range(1)), 3);
    const TreePolicy pol = dp_backward(tree, Cone::orthant(2));
    std::size_t nodes = 0;
    for (auto _ : state) {
        const auto rep = check_martingale_optimality(tree, pol, 1.0, 1e-12, mode(state));
        nodes = rep.drift.size();
        benchmark::DoNotOptimize(rep.max_abs_drift);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * nodes));
    state.SetLabel(state.range(0) == 0 ? "serial" : "omp x" + std::to_string(omp_get_max_threads()));
}

}  // namespace

BENCHMARK(BM_TerminalWealth)->ArgsProduct({{0, 1}, {20000}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MartingaleCheck)->ArgsProduct({{0, 1}, {4}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
