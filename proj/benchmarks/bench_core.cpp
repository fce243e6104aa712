// Microbenchmarks for the hot paths: elementary slit maps, single-point flow,
// two-sided SDE stepping, and the L quadrature.

#include <benchmark/benchmark.h>

#include "sle/loewner.hpp"
#include "sle/natparam.hpp"
#include "sle/sampler.hpp"

using namespace sle;

static void BM_SlitStep(benchmark::State& state) {
    Complex z(0.3, 1.1);
    double u = 0.05;
    for (auto _ : state) {
        Complex w;
        slit_step_try(z, u, 7.5e-5, w);
        benchmark::DoNotOptimize(w);
        u = -u;
    }
}
BENCHMARK(BM_SlitStep);

static void BM_FlowPoint(benchmark::State& state) {
    KappaParams p = kappa_params(8.0 / 3.0);
    DrivingPath d = sample_chordal(p, 1.0, 1e-4, 11);
    for (auto _ : state) {
        FlowState st = flow_point(d, Complex(0, 1), d.steps());
        benchmark::DoNotOptimize(st.g);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(d.steps()));
}
BENCHMARK(BM_FlowPoint)->Unit(benchmark::kMillisecond);

static void BM_TwoSided(benchmark::State& state) {
    KappaParams p = kappa_params(8.0 / 3.0);
    uint64_t seed = 0;
    TwoSidedOptions opt;
    opt.record_series = false;
    for (auto _ : state) {
        TwoSidedRun run = sample_two_sided(p, Complex(0, 1), 2e-4, seed++, opt);
        benchmark::DoNotOptimize(run.hit_time);
    }
}
BENCHMARK(BM_TwoSided)->Unit(benchmark::kMillisecond);

static void BM_InverseTrace(benchmark::State& state) {
    KappaParams p = kappa_params(8.0 / 3.0);
    DrivingPath d = sample_chordal(p, 0.25, 1e-3, 13);
    for (auto _ : state) {
        TracePolyline tr = extract_trace(d, default_tip_offset(p.a, d.dt));
        benchmark::DoNotOptimize(tr.points.back());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(d.steps() * d.steps() / 2));
}
BENCHMARK(BM_InverseTrace)->Unit(benchmark::kMillisecond);

static void BM_MinkowskiContent(benchmark::State& state) {
    DrivingPath d;
    d.a = 0.75;
    d.dt = 1e-3;
    d.values.assign(501, 0.0);
    TracePolyline tr = extract_trace(d, default_tip_offset(d.a, d.dt));
    tr.kappa = 8.0 / 3.0;
    for (auto _ : state) {
        double c = minkowski_content(tr, 0.5, 0.02, DomainSpec::half_plane());
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_MinkowskiContent)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
