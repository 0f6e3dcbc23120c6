#include <benchmark/benchmark.h>

#include "mmill/analysis.hpp"
#include "mmill/mill_kernel.hpp"
#include "mmill/simulator.hpp"

using namespace mmill;

namespace {

MillConfig desk(int n_scales) {
    MillConfig c = n_scales == 1 ? elementary_preset() : composite_preset();
    c.n_series = 64;
    c.n_groups = 8;
    c.series_len = 40'000;
    return c;
}

void BM_SampleMill(benchmark::State& state) {
    const LaplaceParams base{Money(0.02)};
    Rng rng(1);
    double x = 0.01;
    for (auto _ : state) {
        x = sample_mill(x == 0 ? 0.01 : x, base, rng);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_SampleMill);

void BM_BatchSerial(benchmark::State& state) {
    const MillConfig c = desk(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_batch_serial(c));
    state.SetItemsProcessed(state.iterations() * c.n_series * c.series_len);
}
BENCHMARK(BM_BatchSerial)->Arg(1)->Arg(40)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_BatchParallel(benchmark::State& state) {
    const MillConfig c = desk(static_cast<int>(state.range(0)));
    const int threads = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_batch(c, threads));
    state.SetItemsProcessed(state.iterations() * c.n_series * c.series_len);
}
BENCHMARK(BM_BatchParallel)
    ->ArgsProduct({{1, 40}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_StreamMillness(benchmark::State& state) {
    const MillConfig c = desk(1);
    StreamRequest req;
    req.millness_scales = {1, 3, 6};
    for (auto _ : state) benchmark::DoNotOptimize(simulate_and_analyze(c, req, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_StreamMillness)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
