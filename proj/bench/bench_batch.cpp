// Serial vs OpenMP batch execution over a TA-delta sweep.

#include <array>

#include <benchmark/benchmark.h>

#include "nrsim/batch.hpp"
#include "nrsim/scenario.hpp"

namespace {

nrsim::Scenario sweep_base(long long durationMs) {
  auto s = nrsim::parse_scenario(R"(
[scenario]
name = bench_sweep
duration_ms = 600000
[cell]
id = 1
position_m = 500
[cell]
id = 2
clone_of = 1
rogue = true
position_m = 120
[attack]
kind = ta_delta
delta_units = 30
[ue]
position_m = 100
connect_at_ms = 1000
)");
  s.duration = nrsim::SimTime{durationMs};
  return s;
}

const std::array<int, 7> kDeltas{5, 10, 20, 30, 40, 50, 60};

void BM_BatchSerial(benchmark::State& state) {
  const auto batch = nrsim::ta_delta_sweep(sweep_base(state.range(0)), kDeltas);
  for (auto _ : state) benchmark::DoNotOptimize(nrsim::run_batch_serial(batch));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch.size()));
}

void BM_BatchParallel(benchmark::State& state) {
  const auto batch = nrsim::ta_delta_sweep(sweep_base(state.range(0)), kDeltas);
  for (auto _ : state) benchmark::DoNotOptimize(nrsim::run_batch_parallel(batch));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch.size()));
}

}  // namespace

BENCHMARK(BM_BatchSerial)->Arg(60000)->Arg(600000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Arg(60000)->Arg(600000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
