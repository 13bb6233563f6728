#include <benchmark/benchmark.h>

#include <random>

#include "geoaug/gp.hpp"

using namespace geoaug;

namespace {

void BM_LogMarginalLikelihood(benchmark::State& state) {
  const Index n = state.range(0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix x(n, 4);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < 4; ++j) x(i, j) = u(rng);
    y(i) = std::sin(3.0 * x(i, 0)) + 0.1 * u(rng);
  }
  const KernelExpr k = KernelExpr::sum(KernelExpr::rbf(1.0, 0.5), KernelExpr::lin(0.5));
  for (auto _ : state) benchmark::DoNotOptimize(log_marginal_likelihood(k, 0.01, x, y, y.mean()));
  state.SetComplexityN(n);
}
BENCHMARK(BM_LogMarginalLikelihood)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNCubed);

}  // namespace
