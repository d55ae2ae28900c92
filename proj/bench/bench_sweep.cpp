// Serial reference vs OpenMP sweep over the same (w, delta) grid.
#include "srsync/harness.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

namespace {

srsync::SweepSpec grid(int side, int jobs) {
    srsync::SweepSpec s;
    s.scenario = srsync::Scenario::BiQuantum;
    s.w_grid = srsync::linspace(0.05, 1.5, side);
    s.delta_grid = srsync::linspace(0.0, 1.5, side);
    s.outputs = {srsync::Output::Z, srsync::Output::ReAB, srsync::Output::Linewidths};
    s.parallelism = jobs;
    return s;
}

void BM_SweepSerial(benchmark::State& st) {
    auto s = grid(static_cast<int>(st.range(0)), 1);
    for (auto _ : st) benchmark::DoNotOptimize(srsync::run_sweep_serial(s));
    st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

void BM_SweepParallel(benchmark::State& st) {
    auto s = grid(static_cast<int>(st.range(0)), omp_get_max_threads());
    for (auto _ : st) benchmark::DoNotOptimize(srsync::run_sweep(s));
    st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
    st.counters["threads"] = omp_get_max_threads();
}

}

BENCHMARK(BM_SweepSerial)->Arg(16)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(16)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
