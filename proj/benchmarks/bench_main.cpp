#include <benchmark/benchmark.h>

#include "ncclock/methods.hpp"
#include "ncclock/reclock.hpp"
#include "ncclock/regulators.hpp"
#include "ncclock/scenarios.hpp"

using namespace ncclock;

namespace {

// Concave staircase of `n` leaky buckets, the usual shape of an aggregate arrival curve.
PwlCurve concave(long n) {
    PwlCurve c = make_leaky_bucket(n + 1, 1);
    for (long k = 1; k < n; ++k) c = min_curve(c, make_leaky_bucket(n + 1 - k, 1 + 2 * k));
    return c;
}

// Convex chain of `n` rate-latency curves.
PwlCurve convex(long n) {
    PwlCurve c = make_rate_latency(1, 0);
    for (long k = 1; k < n; ++k) c = max_curve(c, make_rate_latency(k + 1, k));
    return c;
}

void BM_Convolve(benchmark::State& state) {
    PwlCurve a = concave(state.range(0)), b = convex(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(convolve(a, b));
}
BENCHMARK(BM_Convolve)->RangeMultiplier(2)->Range(2, 32);

void BM_Deconvolve(benchmark::State& state) {
    PwlCurve a = concave(state.range(0)), b = convex(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(deconvolve(a, b));
}
BENCHMARK(BM_Deconvolve)->RangeMultiplier(2)->Range(2, 32);

void BM_HorizontalDeviation(benchmark::State& state) {
    PwlCurve a = concave(state.range(0));
    PwlCurve b = convex(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(horizontal_deviation(a, b));
}
BENCHMARK(BM_HorizontalDeviation)->RangeMultiplier(2)->Range(2, 64);

void BM_ReclockArrivalGeneric(benchmark::State& state) {
    PwlCurve a = concave(state.range(0));
    ClockEnvelope env = preset_envelope("tsn-tight-sync");
    for (auto _ : state) benchmark::DoNotOptimize(reclock_arrival_curve(a, env));
}
BENCHMARK(BM_ReclockArrivalGeneric)->RangeMultiplier(2)->Range(2, 32);

void BM_ValidateEnvelope(benchmark::State& state) {
    std::vector<ClockPoint> pts;
    Rational d = 0;
    for (long k = 0; k <= state.range(0); ++k) {
        pts.push_back({Rational(k), d});
        d += k % 2 ? Rational(10001, 10000) : Rational(9999, 10000);
    }
    ClockFunction clock(pts, 1, 1);
    ClockEnvelope env = preset_envelope("tsn-nonsync");
    for (auto _ : state) benchmark::DoNotOptimize(validate_envelope(clock, env, 0, state.range(0)));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ValidateEnvelope)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_SimulatePfr(benchmark::State& state) {
    PacketTrace in = simulate_greedy_source({1, 4}, 1, 0, state.range(0));
    ClockFunction slow = ClockFunction::affine(Rational(9999, 10000), 0);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_pfr(in, LeakyBucket{1, 4}, slow, "regulator"));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(in.events.size()));
}
BENCHMARK(BM_SimulatePfr)->RangeMultiplier(4)->Range(64, 16384);

void BM_NonSyncScenario(benchmark::State& state) {
    NonSyncInstabilityParams p;
    p.periods = static_cast<std::size_t>(state.range(0));
    NonSyncInstability ns = build_nonsync_instability(p);
    for (auto _ : state) benchmark::DoNotOptimize(run_scenario(ns.scenario));
}
BENCHMARK(BM_NonSyncScenario)->Arg(20)->Arg(200);

void BM_SyncIrScenario(benchmark::State& state) {
    SyncIrInstabilityParams p;
    p.n = static_cast<std::size_t>(state.range(0));
    SyncIrInstability ir = build_sync_ir_instability(p);
    for (auto _ : state) benchmark::DoNotOptimize(run_scenario(ir.scenario));
}
BENCHMARK(BM_SyncIrScenario)->Arg(3)->Arg(8);

void BM_EteCompare(benchmark::State& state) {
    CompareSetup setup;
    std::vector<Method> methods{Method::Cascade, Method::Adam, Method::SyncNonAdapted};
    for (auto _ : state) benchmark::DoNotOptimize(ete_compare(setup, static_cast<std::size_t>(state.range(0)), methods));
}
BENCHMARK(BM_EteCompare)->Arg(10)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
