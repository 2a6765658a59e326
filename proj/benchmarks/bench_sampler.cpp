#include <benchmark/benchmark.h>

#include "fvlab/rng.hpp"
#include "fvlab/stable_motion.hpp"

namespace {

using namespace fvlab;

void BM_Stable1d(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0)) / 10.0;
  RngStream rng(1, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_stable_1d(alpha, rng));
  }
}
BENCHMARK(BM_Stable1d)->Arg(5)->Arg(10)->Arg(15)->Arg(20);

void BM_IsotropicIncrement(benchmark::State& state) {
  const StableParams params{1.5, static_cast<int>(state.range(0))};
  RngStream rng(1, 0);
  std::vector<double> x(static_cast<std::size_t>(params.dim), 0.0);
  for (auto _ : state) {
    add_isotropic_increment(params, 0.05, rng, x.data());
    benchmark::DoNotOptimize(x[0]);
  }
}
BENCHMARK(BM_IsotropicIncrement)->Arg(1)->Arg(2)->Arg(3);

void BM_Subordinator(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_subordinator(0.75, 1.0, rng));
  }
}
BENCHMARK(BM_Subordinator);

}  // namespace
