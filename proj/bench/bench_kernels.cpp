// Serial reference vs OpenMP kernels. Arg 0 = Exec::serial, 1 = Exec::parallel.

#include "collapse/bell.hpp"
#include "collapse/walk.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace collapse;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

void set_label(benchmark::State& state)
{
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel x" + std::to_string(worker_count()));
}

void BM_BornTwoState(benchmark::State& state)
{
    const auto qs = normalize(std::vector<Complex>{std::sqrt(0.3), std::sqrt(0.7)});
    WalkConfig cfg;
    cfg.grid_resolution = 1000;
    const std::int64_t trials = 2000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(born_statistics(qs, trials, cfg, exec_of(state)));
    }
    state.SetItemsProcessed(state.iterations() * trials);
    set_label(state);
}

void BM_BornThreeState(benchmark::State& state)
{
    const auto qs = normalize(std::vector<Complex>{std::sqrt(0.5), std::sqrt(0.3), std::sqrt(0.2)});
    WalkConfig cfg;
    cfg.grid_resolution = 1000;
    const std::int64_t trials = 500;
    for (auto _ : state) {
        benchmark::DoNotOptimize(born_statistics(qs, trials, cfg, exec_of(state)));
    }
    state.SetItemsProcessed(state.iterations() * trials);
    set_label(state);
}

void BM_ImageEvent(benchmark::State& state)
{
    const auto a = DetectorSetting::from_degrees(0);
    const auto b = DetectorSetting::from_degrees(60);
    const std::int64_t n = 1'000'000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(image_correlation_event(a, b, n, SamplingPlan{0, 0, 1 << 16, exec_of(state)}));
    }
    state.SetItemsProcessed(state.iterations() * n);
    set_label(state);
}

void BM_BellSign(benchmark::State& state)
{
    const auto a = DetectorSetting::from_degrees(0);
    const auto b = DetectorSetting::from_degrees(60);
    const std::int64_t n = 1'000'000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bell_sign_correlation(a, b, n, SamplingPlan{0, 0, 1 << 16, exec_of(state)}));
    }
    state.SetItemsProcessed(state.iterations() * n);
    set_label(state);
}

void BM_SolveC2Grid(benchmark::State& state)
{
    std::vector<double> thetas;
    for (int d = 0; d <= 180; ++d) {
        thetas.push_back(d * std::numbers::pi / 180);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_c2_grid(thetas, exec_of(state)));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(thetas.size()));
    set_label(state);
}

}  // namespace

BENCHMARK(BM_BornTwoState)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BornThreeState)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ImageEvent)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BellSign)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SolveC2Grid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
