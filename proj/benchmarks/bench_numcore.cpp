#include <benchmark/benchmark.h>

#include <random>

#include "geoaug/kernels.hpp"
#include "geoaug/numcore.hpp"

using namespace geoaug;

namespace {

Matrix points(Index n, Index d) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = u(rng);
  return x;
}

void BM_Cholesky(benchmark::State& state) {
  const Index n = state.range(0);
  Matrix a = gram(KernelExpr::rbf(1.0, 0.5), points(n, 2));
  a.diagonal().array() += 1e-2;
  for (auto _ : state) benchmark::DoNotOptimize(cholesky(a));
  state.SetComplexityN(n);
}
BENCHMARK(BM_Cholesky)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNCubed);

void BM_GramComposite(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix x = points(n, 8);
  const KernelExpr k =
      KernelExpr::sum(KernelExpr::product(KernelExpr::rbf(1.0, 0.5), KernelExpr::lin(1.0)), KernelExpr::quad(1.0, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(gram(k, x));
  state.SetComplexityN(n);
}
BENCHMARK(BM_GramComposite)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNSquared);

}  // namespace
