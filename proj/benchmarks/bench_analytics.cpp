#include <benchmark/benchmark.h>

#include <vector>

#include "fvlab/analytics.hpp"

namespace {

using namespace fvlab;

void BM_TransitionDensity(benchmark::State& state) {
  const StableParams params{1.5, static_cast<int>(state.range(0))};
  std::vector<double> x(static_cast<std::size_t>(params.dim), 0.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(transition_density(params, 1.0, x));
  }
}
BENCHMARK(BM_TransitionDensity)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMicrosecond);

void BM_SemigroupApply(benchmark::State& state) {
  const StableParams params{1.5, 1};
  const TestFunction f = TestFunction::gaussian_bump(1, 1.0);
  const std::vector<double> x{0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(semigroup_apply(params, 2.0, f, x));
  }
}
BENCHMARK(BM_SemigroupApply)->Unit(benchmark::kMicrosecond);

void BM_ExpansionError(benchmark::State& state) {
  const StableParams params{2.0, 1};
  const TestFunction f = TestFunction::gaussian_bump(1, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(expansion_error(params, 16.0, f, 2));
  }
}
BENCHMARK(BM_ExpansionError)->Unit(benchmark::kMillisecond);

}  // namespace
