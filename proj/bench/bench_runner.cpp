#include <benchmark/benchmark.h>

#include "mfnc/stats.hpp"

namespace {

mfnc::ModelParams bench_params(std::int64_t n) {
  mfnc::ModelParams p;
  p.n_neurons = static_cast<std::size_t>(n);
  return p;
}

// R coupled runs through the serial reference loop.
void BM_RunPointSerial(benchmark::State& state) {
  const mfnc::ModelParams p = bench_params(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(mfnc::run_point(p, 16, mfnc::Execution::serial));
  state.SetItemsProcessed(state.iterations() * 16);
}

void BM_RunPointOpenMP(benchmark::State& state) {
  const mfnc::ModelParams p = bench_params(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(mfnc::run_point(p, 16, mfnc::Execution::openmp, 0));
  state.SetItemsProcessed(state.iterations() * 16);
}

}  // namespace

BENCHMARK(BM_RunPointSerial)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunPointOpenMP)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
