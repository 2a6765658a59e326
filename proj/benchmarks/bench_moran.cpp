#include <benchmark/benchmark.h>

#include "fvlab/moran.hpp"

namespace {

using namespace fvlab;

RunConfig bench_config(int particles, bool genealogy) {
  RunConfig cfg;
  cfg.params = {2.0, 1};
  cfg.schedule = SamplingSchedule::constant(1.0);
  cfg.n_particles = particles;
  cfg.init = InitialDistribution::isotropic_gaussian(1.0);
  cfg.motion_step = 0.05;
  cfg.horizon = 0.5;
  cfg.snapshot_times = {0.5};
  cfg.tracked = {TestFunction::gaussian_bump(1, 1.0)};
  cfg.track_genealogy = genealogy;
  return cfg;
}

// Events processed per second for the full event loop.
void BM_MoranRun(benchmark::State& state) {
  const RunConfig cfg = bench_config(static_cast<int>(state.range(0)), false);
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    RunConfig c = cfg;
    c.seed = seed++;
    const RunResult res = run_moran(std::move(c));
    events += res.event_count;
  }
  state.counters["events/s"] =
      benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_MoranRun)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_MoranRunWithGenealogy(benchmark::State& state) {
  const RunConfig cfg = bench_config(static_cast<int>(state.range(0)), true);
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    RunConfig c = cfg;
    c.seed = seed++;
    const RunResult res = run_moran(std::move(c));
    events += res.event_count;
  }
  state.counters["events/s"] =
      benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_MoranRunWithGenealogy)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_InhabitationTime(benchmark::State& state) {
  RunConfig cfg = bench_config(200, true);
  cfg.horizon = 2.0;
  cfg.snapshot_times = {2.0};
  const RunResult res = run_moran(std::move(cfg));
  const TestFunction f = TestFunction::gaussian_bump(1, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        inhabitation_time(res.final_state.lineage_ids, res.arena, f, 2.0));
  }
}
BENCHMARK(BM_InhabitationTime)->Unit(benchmark::kMicrosecond);

}  // namespace
