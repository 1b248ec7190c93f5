#include <benchmark/benchmark.h>

#include "pushsum/bounds.hpp"
#include "pushsum/coefficients.hpp"
#include "pushsum/measure.hpp"
#include "pushsum/protocol.hpp"

using namespace pushsum;

static void BM_PushSumStep(benchmark::State& state) {
    ProtocolParams params;
    params.n = static_cast<int>(state.range(0));
    params.p = 0.5;
    std::vector<double> values(params.n, 1.0);
    values[0] = -1.0;
    SystemState system = make_initial_state(values);
    EventStream events(params.n, params.p, 1);
    for (auto _ : state) {
        push_sum_step(system, params, events.next());
        if (system.t % kRenormalizeInterval == 0) renormalize(system);
        benchmark::DoNotOptimize(system.agents.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PushSumStep)->Arg(2)->Arg(5)->Arg(16);

static void BM_SampleTau(benchmark::State& state) {
    ProtocolParams params;
    params.n = static_cast<int>(state.range(0));
    params.p = 0.5;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const TauSample sample = sample_tau(params, ++seed);
        benchmark::DoNotOptimize(sample.steps);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SampleTau)->Arg(2)->Arg(5);

static void BM_EstimateR(benchmark::State& state) {
    ProtocolParams params;
    params.n = 2;
    params.p = 0.6;
    for (auto _ : state) {
        const ErrorEstimate est = estimate_R(params, 2000, 7, 0);
        benchmark::DoNotOptimize(est.r_hat);
    }
    state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_EstimateR)->Unit(benchmark::kMillisecond);

static void BM_Pushforward(benchmark::State& state) {
    const DiscreteMeasure m = uniform_measure(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const DiscreteMeasure out = pushforward(m, map_f2);
        benchmark::DoNotOptimize(out.bins.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Pushforward)->Arg(10001)->Arg(100001);

static void BM_InvarianceIterate(benchmark::State& state) {
    for (auto _ : state) {
        const FixpointResult result = invariance_iterate(0.6, static_cast<int>(state.range(0)), 25);
        benchmark::DoNotOptimize(result.measure.bins.data());
    }
    state.SetItemsProcessed(state.iterations() * 25);
}
BENCHMARK(BM_InvarianceIterate)->Arg(10001)->Unit(benchmark::kMillisecond);

static void BM_UpperBoundHighP(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(upper_bound_highp(0.9, 60));
}
BENCHMARK(BM_UpperBoundHighP);

BENCHMARK_MAIN();
