#include <benchmark/benchmark.h>

#include "prw/rng.hpp"
#include "prw/solvers.hpp"
#include "prw/testbed.hpp"
#include "prw/transport.hpp"

using namespace prw;

namespace {

ProblemInstance hypercube(Index n, Index d) {
    return gen_fragmented_hypercube(n, d, 2, 1).first;
}

void SinkhornSweep(benchmark::State& state) {
    const Index n = state.range(0);
    const ProblemInstance inst = hypercube(n, 30);
    const PlanContext ctx(inst, StiefelPoint::random(30, 2, 3), 0.2);
    DualPotentials pot{Vector::Zero(n), Vector::Zero(n)};
    for (auto _ : state) {
        pot = v_update(ctx, u_update(ctx, pot));
        benchmark::DoNotOptimize(pot.u.data());
    }
    state.SetComplexityN(n);
}
BENCHMARK(SinkhornSweep)->Arg(100)->Arg(250)->Arg(500)->Complexity(benchmark::oNSquared);

void PlanFromPotentials(benchmark::State& state) {
    const Index n = state.range(0);
    const ProblemInstance inst = hypercube(n, 30);
    const PlanContext ctx(inst, StiefelPoint::random(30, 2, 3), 0.2);
    DualPotentials pot{Vector::Zero(n), Vector::Zero(n)};
    pot = v_update(ctx, u_update(ctx, pot));
    for (auto _ : state) {
        const TransportPlan plan = plan_from_potentials(ctx, pot);
        benchmark::DoNotOptimize(plan.matrix().data());
    }
}
BENCHMARK(PlanFromPotentials)->Arg(100)->Arg(500);

void VpiApply(benchmark::State& state) {
    const Index n = state.range(0);
    const ProblemInstance inst = hypercube(n, 50);
    const StiefelPoint u = StiefelPoint::random(50, 2, 3);
    const PlanContext ctx(inst, u, 0.2);
    DualPotentials pot{Vector::Zero(n), Vector::Zero(n)};
    pot = v_update(ctx, u_update(ctx, pot));
    const TransportPlan plan = plan_from_potentials(ctx, pot);
    for (auto _ : state) {
        const Matrix vu = vpi_apply(inst, plan, u);
        benchmark::DoNotOptimize(vu.data());
    }
}
BENCHMARK(VpiApply)->Arg(100)->Arg(500);

void RetractStep(benchmark::State& state) {
    const Index d = state.range(0);
    const Index k = state.range(1);
    const Retraction method = state.range(2) == 0 ? Retraction::qr : Retraction::polar;
    Rng rng(5);
    const StiefelPoint u = StiefelPoint::random(d, k, rng.next_u64());
    const Matrix xi = 0.01 * project_tangent(u, rng.gaussian_matrix(d, k)).matrix();
    for (auto _ : state) {
        const StiefelPoint moved = retract(u, xi, method);
        benchmark::DoNotOptimize(moved.matrix().data());
    }
}
BENCHMARK(RetractStep)->Args({50, 2, 0})->Args({50, 2, 1})->Args({300, 5, 0})->Args({300, 5, 1});

void RoundToPolytope(benchmark::State& state) {
    const Index n = state.range(0);
    Rng rng(7);
    Matrix pi(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) pi(i, j) = rng.uniform(0.0, 1.0);
    pi /= pi.sum();
    const TransportPlan plan = TransportPlan::from_matrix(pi);
    const Vector w = Vector::Constant(n, 1.0 / double(n));
    for (auto _ : state) {
        const TransportPlan rounded = round_to_polytope(plan, w, w);
        benchmark::DoNotOptimize(rounded.matrix().data());
    }
}
BENCHMARK(RoundToPolytope)->Arg(100)->Arg(500);

void RbcdSolve(benchmark::State& state) {
    const Index n = state.range(0);
    const ProblemInstance inst = hypercube(n, 30);
    SolverConfig config;
    config.eta = 0.2;
    config.tau = 0.005;
    config.eps1 = config.eps2 = 0.1;
    config.k = 2;
    for (auto _ : state) {
        const SolveResult result = rbcd(inst, config);
        benchmark::DoNotOptimize(result.prw_value);
    }
}
BENCHMARK(RbcdSolve)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
    ::benchmark::Initialize(&argc, argv);
    if (::benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    ::benchmark::RunSpecifiedBenchmarks();
    ::benchmark::Shutdown();
    return 0;
}
