// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "lbsgb/experiment.hpp"
#include "lbsgb/oracles.hpp"

using namespace lbsgb;

namespace {

ExperimentConfig bench_config(std::size_t K) {
  ExperimentConfig cfg;
  cfg.name = "bench";
  cfg.K = K;
  cfg.r_max = 1.0;
  cfg.delta_star = 0.1;
  cfg.T = 20000;
  cfg.n_runs = 8;
  cfg.record_every = 1000;
  cfg.base_seed = 3;
  cfg.algorithms = {StepRule::sgb(0.1), StepRule::lbsgb(0.1, 1000.0)};
  return cfg;
}

void BM_ExperimentParallel(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg));
  state.SetItemsProcessed(state.iterations() * cfg.T * cfg.n_runs * cfg.algorithms.size());
}

void BM_ExperimentSerial(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment_serial(cfg));
  state.SetItemsProcessed(state.iterations() * cfg.T * cfg.n_runs * cfg.algorithms.size());
}

void BM_SweepParallel(benchmark::State& state) {
  const auto id = static_cast<BoundId>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sweep_bound(id, 1000, RngStream(1, 0)));
  state.SetLabel(std::string(to_string(id)));
}

void BM_SweepSerial(benchmark::State& state) {
  const auto id = static_cast<BoundId>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sweep_bound_serial(id, 1000, RngStream(1, 0)));
  state.SetLabel(std::string(to_string(id)));
}

}  // namespace

BENCHMARK(BM_ExperimentParallel)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentSerial)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)
    ->Arg(static_cast<int>(BoundId::Smoothness))
    ->Arg(static_cast<int>(BoundId::SelfBounding))
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)
    ->Arg(static_cast<int>(BoundId::Smoothness))
    ->Arg(static_cast<int>(BoundId::SelfBounding))
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
