#include <benchmark/benchmark.h>

#include <random>

#include "geoaug/kriging.hpp"

using namespace geoaug;

namespace {

std::vector<LonLat> sites(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<LonLat> s(n);
  for (auto& p : s) p = {u(rng), u(rng)};
  return s;
}

void BM_OrdinaryKrigingBuild(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = sites(n, rng);
  const Vector v = Vector::Random(static_cast<Index>(n));
  const auto vg = VariogramParams::bounded(VariogramKind::spherical, 0.1, 1.0, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(KrigingModel::ordinary(vg, s, v));
}
BENCHMARK(BM_OrdinaryKrigingBuild)->RangeMultiplier(2)->Range(64, 512);

void BM_OrdinaryKrigingPredict(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = sites(n, rng);
  const auto q = sites(256, rng);
  const auto m = KrigingModel::ordinary(VariogramParams::bounded(VariogramKind::exponential, 0.1, 1.0, 0.3), s,
                                        Vector::Random(static_cast<Index>(n)));
  for (auto _ : state) {
    for (const auto& p : q) benchmark::DoNotOptimize(m.predict_point(p));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(q.size()));
}
BENCHMARK(BM_OrdinaryKrigingPredict)->RangeMultiplier(2)->Range(64, 512);

}  // namespace
