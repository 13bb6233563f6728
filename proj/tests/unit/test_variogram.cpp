#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "geoaug/errors.hpp"
#include "geoaug/variogram.hpp"
#include "oracles.hpp"

using namespace geoaug;

namespace {

std::vector<LonLat> random_sites(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<LonLat> s(n);
  for (auto& p : s) p = {u(rng), u(rng)};
  return s;
}

/// Exact sample of a zero-mean field with exponential covariance plus nugget.
std::vector<double> sample_field(std::mt19937_64& rng, const std::vector<LonLat>& s, double nugget, double c,
                                 double a) {
  const auto n = static_cast<Index>(s.size());
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      k(i, j) = c * std::exp(-distance(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)]) / a) +
                (i == j ? nugget : 0.0);
  const Eigen::LLT<Matrix> llt(k);
  std::normal_distribution<double> z(0.0, 1.0);
  Vector e(n);
  for (Index i = 0; i < n; ++i) e(i) = z(rng);
  const Vector f = llt.matrixL() * e;
  return {f.data(), f.data() + n};
}

}  // namespace

TEST(ModelEval, ClosedForms) {
  const auto sph = VariogramParams::bounded(VariogramKind::spherical, 1.0, 4.0, 0.2);
  EXPECT_DOUBLE_EQ(model_eval(sph, 0.2), 5.0);
  EXPECT_DOUBLE_EQ(model_eval(sph, 0.7), 5.0);
  const auto ex = VariogramParams::bounded(VariogramKind::exponential, 1.0, 4.0, 0.2);
  EXPECT_NEAR(model_eval(ex, 0.2), 1.0 + 4.0 * (1.0 - std::exp(-1.0)), 1e-15);
  const auto ga = VariogramParams::bounded(VariogramKind::gaussian, 0.5, 2.0, 0.3);
  EXPECT_NEAR(model_eval(ga, 0.3), 0.5 + 2.0 * (1.0 - std::exp(-1.0)), 1e-15);
  EXPECT_DOUBLE_EQ(model_eval(VariogramParams::linear(1.0, 2.0), 3.0), 7.0);
  for (auto p : {sph, ex, ga, VariogramParams::linear(1.0, 2.0)}) {
    EXPECT_EQ(model_eval(p, 0.0), 0.0);
    EXPECT_NEAR(model_eval(p, 1e-12), p.nugget, 1e-9);
  }
  EXPECT_THROW(model_eval(ex, -1.0), NumericError);
}

TEST(ModelEval, MonotoneOnPositiveLags) {
  for (auto kind : {VariogramKind::exponential, VariogramKind::gaussian, VariogramKind::spherical}) {
    const auto p = VariogramParams::bounded(kind, 0.3, 2.0, 0.25);
    double prev = model_eval(p, 1e-9);
    for (int i = 1; i <= 1000; ++i) {
      const double g = model_eval(p, i * 1e-3);
      EXPECT_GE(g, prev) << to_string(kind) << " at " << i;
      prev = g;
    }
  }
}

TEST(CovFromVariogram, SumsToSill) {
  const auto sph = VariogramParams::bounded(VariogramKind::spherical, 1.0, 4.0, 0.2);
  EXPECT_DOUBLE_EQ(cov_from_variogram(sph, 0.0), 5.0);
  EXPECT_DOUBLE_EQ(cov_from_variogram(sph, 0.2), 0.0);
  const auto ex = VariogramParams::bounded(VariogramKind::exponential, 0.0, 1.0, 0.1);
  EXPECT_LT(cov_from_variogram(ex, 10.0), 1e-40);
  for (auto p : {sph, ex}) {
    for (double h : {0.0, 0.01, 0.1, 0.15, 0.5, 3.0}) EXPECT_EQ(cov_from_variogram(p, h) + model_eval(p, h), p.sill());
  }
  EXPECT_THROW(cov_from_variogram(VariogramParams::linear(0.0, 1.0), 0.5), NumericError);
}

TEST(VariogramParams, ValidationAndJson) {
  EXPECT_THROW(VariogramParams::bounded(VariogramKind::spherical, -1.0, 1.0, 1.0), ConfigError);
  EXPECT_THROW(VariogramParams::bounded(VariogramKind::spherical, 0.0, 1.0, 0.0), ConfigError);
  EXPECT_THROW(VariogramParams::linear(0.0, -1.0), ConfigError);
  const auto p = VariogramParams::bounded(VariogramKind::gaussian, 0.1, 2.0, 0.3);
  const auto back = VariogramParams::from_json(nlohmann::json::parse(p.to_json().dump()));
  EXPECT_EQ(back.kind, p.kind);
  EXPECT_EQ(back.partial_sill, 2.0);
  EXPECT_EQ(VariogramParams::from_json(VariogramParams::linear(0.5, 3.0).to_json()).slope, 3.0);
  EXPECT_EQ(parse_variogram_kind("SPHE"), VariogramKind::spherical);
}

TEST(Empirical, TwoPointsSingleBin) {
  const std::vector<LonLat> s{{0.0, 0.0}, {0.3, 0.4}};
  const std::vector<double> v{0.0, 2.0};
  const auto ev = empirical_semivariogram(s, v, 15, 0.5);
  ASSERT_EQ(ev.bins.size(), 1u);
  EXPECT_DOUBLE_EQ(ev.bins[0].gamma, 2.0);
  EXPECT_EQ(ev.bins[0].pair_count, 1u);
  EXPECT_THROW(empirical_semivariogram(s, v), DataError);  // default lag is d / 2
}

TEST(Empirical, ConstantValuesGiveZero) {
  std::mt19937_64 rng(1);
  const auto s = random_sites(rng, 30);
  const std::vector<double> v(30, 7.0);
  for (const auto& b : empirical_semivariogram(s, v).bins) EXPECT_EQ(b.gamma, 0.0);
}

TEST(Empirical, MatchesAllPairsOracle) {
  std::mt19937_64 rng(2);
  const auto s = random_sites(rng, 100);
  const auto v = sample_field(rng, s, 0.1, 1.0, 0.2);
  const std::size_t nb = 12;
  const auto ev = empirical_semivariogram(s, v, nb);

  double dmax = 0.0;
  for (const auto& a : s)
    for (const auto& b : s) dmax = std::max(dmax, std::hypot(a.lon - b.lon, a.lat - b.lat));
  const double lag = dmax / 2.0, w = lag / nb;
  std::vector<double> sum(nb, 0.0);
  std::vector<std::size_t> cnt(nb, 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (i == j) continue;
      const double d = std::hypot(s[i].lon - s[j].lon, s[i].lat - s[j].lat);
      if (d > lag) continue;
      const auto b = std::min(nb - 1, static_cast<std::size_t>(std::floor(d / w)));
      sum[b] += 0.5 * (v[i] - v[j]) * (v[i] - v[j]);
      ++cnt[b];
    }
  }
  std::size_t k = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    if (cnt[b] == 0) continue;
    ASSERT_LT(k, ev.bins.size());
    EXPECT_EQ(ev.bins[k].pair_count * 2, cnt[b]);
    EXPECT_NEAR(ev.bins[k].gamma, sum[b] / static_cast<double>(cnt[b]), 1e-12);
    EXPECT_NEAR(ev.bins[k].h_center, (b + 0.5) * w, 1e-12);
    ++k;
  }
  EXPECT_EQ(k, ev.bins.size());
}

TEST(Empirical, PermutationInvariant) {
  std::mt19937_64 rng(3);
  auto s = random_sites(rng, 40);
  std::vector<double> v(40);
  std::normal_distribution<double> z;
  for (auto& x : v) x = z(rng);
  const auto a = empirical_semivariogram(s, v);
  std::vector<std::size_t> perm(40);
  for (std::size_t i = 0; i < 40; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<LonLat> s2;
  std::vector<double> v2;
  for (auto i : perm) {
    s2.push_back(s[i]);
    v2.push_back(v[i]);
  }
  const auto b = empirical_semivariogram(s2, v2);
  ASSERT_EQ(a.bins.size(), b.bins.size());
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    EXPECT_EQ(a.bins[i].pair_count, b.bins[i].pair_count);
    EXPECT_NEAR(a.bins[i].gamma, b.bins[i].gamma, 1e-12);
  }
  EXPECT_EQ(a.to_csv().substr(0, 8), "h,gamma\n");
}

TEST(FitVariogram, ExactRecoveryWhenGridContainsTruth) {
  const auto truth = VariogramParams::bounded(VariogramKind::spherical, 1.0, 4.0, 0.2);
  EmpiricalVariogram ev;
  ev.n_bins = 10;
  ev.max_lag = 0.5;
  for (int b = 0; b < 10; ++b) {
    const double h = 0.025 + 0.05 * b;
    ev.bins.push_back({h, model_eval(truth, h), static_cast<std::size_t>(10 + b)});
  }
  VariogramGrid g;
  g.nuggets = {0.0, 0.5, 1.0, 2.0};
  g.partial_sills = {2.0, 4.0, 6.0};
  g.ranges = {0.1, 0.2, 0.3};
  const VariogramFit f = fit_variogram(ev, VariogramKind::spherical, g);
  EXPECT_EQ(f.error, 0.0);
  EXPECT_EQ(f.params.nugget, 1.0);
  EXPECT_EQ(f.params.partial_sill, 4.0);
  EXPECT_EQ(f.params.range, 0.2);

  VariogramGrid one;
  one.nuggets = {0.3};
  one.partial_sills = {9.0};
  one.ranges = {0.05};
  const VariogramFit f1 = fit_variogram(ev, VariogramKind::spherical, one);
  EXPECT_EQ(f1.params.nugget, 0.3);
  EXPECT_EQ(f1.params.partial_sill, 9.0);
  EXPECT_EQ(f1.params.range, 0.05);
  EXPECT_GT(f1.error, 0.0);
}

TEST(FitVariogram, RecoversNoisyExponentialField) {
  std::vector<double> nug, sill, range;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(200 + seed);
    const auto s = random_sites(rng, 500);
    const auto v = sample_field(rng, s, 0.5, 2.0, 0.1);
    const auto ev = empirical_semivariogram(s, v, 15, 0.3);
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x / 500.0;
    for (double x : v) var += (x - mean) * (x - mean) / 499.0;
    VariogramGrid g = VariogramGrid::defaults(ev, var);
    // Lags up to the practical range and a denser grid than the defaults.
    g.nuggets.clear();
    g.partial_sills.clear();
    g.ranges.clear();
    for (int i = 0; i <= 20; ++i) g.nuggets.push_back(0.05 * i);
    for (int i = 1; i <= 40; ++i) g.partial_sills.push_back(0.1 * i);
    for (int i = 0; i < 30; ++i) g.ranges.push_back(0.02 * std::pow(15.0, i / 29.0));
    const auto f = fit_variogram(ev, VariogramKind::exponential, g);
    nug.push_back(f.params.nugget);
    sill.push_back(f.params.partial_sill);
    range.push_back(f.params.range);
  }
  const auto median = [](std::vector<double> x) {
    std::sort(x.begin(), x.end());
    return 0.5 * (x[19] + x[20]);
  };
  EXPECT_NEAR(median(nug), 0.5, 0.125);
  EXPECT_NEAR(median(sill), 2.0, 0.5);
  EXPECT_NEAR(median(range), 0.1, 0.025);
}

TEST(VariogramGrid, DefaultsFollowVariance) {
  EmpiricalVariogram ev;
  ev.n_bins = 15;
  ev.max_lag = 0.3;
  ev.bins = {{0.01, 1.0, 5}, {0.29, 2.0, 7}};
  const auto g = VariogramGrid::defaults(ev, 2.0);
  EXPECT_EQ(g.nuggets, (std::vector<double>{0.0, 0.1, 0.2, 0.4}));
  EXPECT_EQ(g.partial_sills, (std::vector<double>{1.0, 1.6, 2.0, 2.4}));
  ASSERT_EQ(g.ranges.size(), 10u);
  EXPECT_NEAR(g.ranges.front(), 0.01, 1e-15);
  EXPECT_NEAR(g.ranges.back(), 0.3, 1e-12);
  ASSERT_EQ(g.slopes.size(), 10u);
  EXPECT_NEAR(g.slopes.back(), 2.0 / 0.3, 1e-12);
}
