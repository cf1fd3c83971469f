// Serial reference against the OpenMP kernels for the two parallel paths:
// Monte Carlo replicates and leave-one-out re-pooling.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "metalens/bias_sim.hpp"
#include "metalens/meta_engine.hpp"
#include "metalens/rng.hpp"

namespace {

using namespace metalens;

std::vector<StudyEffect> synthetic_studies(int k) {
  Rng rng(11);
  std::vector<StudyEffect> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double se = rng.uniform(0.02, 0.3);
    const double effect = rng.normal(1.05, se);
    out.push_back({"s" + std::to_string(i), effect, se, p_two_sided((effect - 1.0) / se)});
  }
  return out;
}

void BM_ScenarioSerial(benchmark::State& state) {
  auto s = p_hacked_scenario();
  s.questions_per_study = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario_reference(s, 64));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}

void BM_ScenarioParallel(benchmark::State& state) {
  auto s = p_hacked_scenario();
  s.questions_per_study = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(s, 64));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}

void BM_LeaveOneOutSerial(benchmark::State& state) {
  const auto studies = synthetic_studies(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(leave_one_out_reference(studies, Scale::RawRR, MetaMethod::RandomEffectsDL));
  }
}

void BM_LeaveOneOutParallel(benchmark::State& state) {
  const auto studies = synthetic_studies(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(leave_one_out(studies, Scale::RawRR, MetaMethod::RandomEffectsDL));
  }
}

}  // namespace

BENCHMARK(BM_ScenarioSerial)->Arg(1)->Arg(100)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ScenarioParallel)->Arg(1)->Arg(100)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LeaveOneOutSerial)->Arg(14)->Arg(500)->Arg(4000)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_LeaveOneOutParallel)->Arg(14)->Arg(500)->Arg(4000)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
