#include "loadcast/calls.hpp"
#include "loadcast/kernels.hpp"

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

using namespace loadcast;

namespace {

std::vector<SequenceWindow> windows(std::size_t n, std::size_t dim) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    std::vector<SequenceWindow> out(n);
    for (auto& w : out) {
        w.dim = dim;
        w.steps = 18;
        w.inputs.resize(dim * 18);
        for (auto& v : w.inputs) v = n01(rng);
        w.target = {n01(rng)};
    }
    return out;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_BatchGradient(benchmark::State& state) {
    const auto p = ModelParameters::initialized(CellKind::LSTM, 3, 32, 1);
    const auto ws = windows(256, 3);
    std::vector<std::size_t> batch(static_cast<std::size_t>(state.range(1)));
    std::iota(batch.begin(), batch.end(), 0);
    Gradients g;
    GradientWorkspace gw;
    for (auto _ : state) benchmark::DoNotOptimize(batch_gradient(p, ws, batch, g, gw, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_BatchGradient)->ArgNames({"parallel", "batch"})->ArgsProduct({{0, 1}, {32, 256}});

void BM_Predict(benchmark::State& state) {
    const auto p = ModelParameters::initialized(CellKind::GRU, 3, 32, 1);
    const auto ws = windows(1024, 3);
    for (auto _ : state) benchmark::DoNotOptimize(predict(p, ws, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_Predict)->ArgName("parallel")->Arg(0)->Arg(1);

void BM_SimulateCalls(benchmark::State& state) {
    const std::size_t n = 288 * 20;
    std::vector<std::int64_t> flow(n, 300), segment(n, 0);
    std::vector<double> speed(n, 45.0);
    ScenarioConfig cfg;
    cfg.lambda = 0.6;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_intervals(flow, speed, segment, cfg, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SimulateCalls)->ArgName("parallel")->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
