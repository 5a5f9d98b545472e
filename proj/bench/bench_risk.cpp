// Parallel replication kernel vs the serial reference on small scenarios.
#include <benchmark/benchmark.h>

#include "matpred/risk.hpp"

using namespace matpred;

namespace {

RiskScenario scenario(const PriorSpec& prior, long reps, long inner) {
  RiskScenario s;
  s.dims = Dims(2, 15);
  s.vs = VarianceSpec(1.0, 1.0);
  s.eigs = {24.0, 0.0};
  s.prior = prior;
  s.outer_reps = reps;
  s.inner_n = inner;
  s.master_seed = 7;
  return s;
}

void BM_ParallelJs(benchmark::State& state) {
  const auto s = scenario(prior::JS{}, state.range(0), 500);
  for (auto _ : state) benchmark::DoNotOptimize(kl_risk_mc(s).value);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SerialJs(benchmark::State& state) {
  const auto s = scenario(prior::JS{}, state.range(0), 500);
  for (auto _ : state) benchmark::DoNotOptimize(kl_risk_mc_serial(s).value);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ParallelGb(benchmark::State& state) {
  const auto s = scenario(prior::GB{1.0, 3.0, 1.0}, state.range(0), 500);
  for (auto _ : state) benchmark::DoNotOptimize(kl_risk_mc(s).value);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SerialGb(benchmark::State& state) {
  const auto s = scenario(prior::GB{1.0, 3.0, 1.0}, state.range(0), 500);
  for (auto _ : state) benchmark::DoNotOptimize(kl_risk_mc_serial(s).value);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ParallelJs)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SerialJs)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ParallelGb)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SerialGb)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
