#include <benchmark/benchmark.h>

#include "spqm/dists.hpp"
#include "spqm/parallel.hpp"
#include "spqm/paths.hpp"
#include "spqm/povm.hpp"

namespace {

using namespace spqm;

void BM_FeynmanKac(benchmark::State& state) {
    const auto exec = static_cast<Execution>(state.range(0));
    FeynmanKacConfig cfg;
    cfg.weight = PathWeight::ExpMinus2s;
    cfg.n_paths = 20000;
    cfg.N = 50;
    cfg.dt = 1e-2;
    for (auto _ : state) benchmark::DoNotOptimize(feynman_kac_estimate(cfg, exec).mean);
    state.SetItemsProcessed(state.iterations() * cfg.n_paths);
}

void BM_ModifiedSampler(benchmark::State& state) {
    const auto method = static_cast<ModifiedSampler::Method>(state.range(0));
    const ModifiedSampler s(static_cast<int>(state.range(1)), 1e-3, 1.0, method);
    WienerPath p;
    PathRng rng(1, 0);
    for (auto _ : state) {
        s.draw(p, rng);
        benchmark::DoNotOptimize(p.dw.data());
    }
}

void BM_ChannelMonteCarlo(benchmark::State& state) {
    const auto exec = static_cast<Execution>(state.range(0));
    CMatrix rho = CMatrix::Zero(8, 8);
    rho(0, 0) = 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(channel_monte_carlo(rho, 0.3, 200, 1e-3, 8, 1, 1.0, exec));
}

}  // namespace

BENCHMARK(BM_FeynmanKac)->Arg(static_cast<int>(Execution::Parallel))->Arg(static_cast<int>(Execution::Serial))
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ModifiedSampler)
    ->Args({static_cast<int>(ModifiedSampler::Method::Banded), 1000})
    ->Args({static_cast<int>(ModifiedSampler::Method::Dense), 1000})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ChannelMonteCarlo)->Arg(static_cast<int>(Execution::Parallel))->Arg(static_cast<int>(Execution::Serial))
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
