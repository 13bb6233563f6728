#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "geoaug/errors.hpp"
#include "geoaug/evaluate.hpp"
#include "geoaug/synthetic.hpp"
#include "oracles.hpp"

using namespace geoaug;

namespace {

Dataset synthetic(std::size_t n, std::uint64_t seed) {
  SyntheticFieldSpec spec;
  spec.n_points = n;
  spec.seed = seed;
  return generate_synthetic(spec, fixtures::island_mask()).dataset;
}

ExperimentConfig small_config(std::size_t seeds) {
  ExperimentConfig cfg;
  cfg.seeds.clear();
  for (std::uint64_t s = 0; s < seeds; ++s) cfg.seeds.push_back(s);
  cfg.mask = fixtures::island_mask();
  cfg.interpolator.gp_fit.restarts = 1;
  cfg.interpolator.gp_fit.max_iters = 100;
  cfg.interpolator.search.max_depth = 2;
  cfg.interpolator.search_max_points = 40;
  return cfg;
}

}  // namespace

TEST(Mse, ClosedFormAndOracle) {
  const std::vector<double> a{0, 0}, b{3, 4};
  EXPECT_EQ(mse(a, b), 12.5);
  EXPECT_EQ(mse(b, b), 0.0);
  std::mt19937_64 rng(1);
  const Vector p = oracle::random_points(rng, 100, 1).col(0), t = oracle::random_points(rng, 100, 1).col(0);
  double s = 0.0;
  for (Index i = 0; i < 100; ++i) s += (p(i) - t(i)) * (p(i) - t(i));
  EXPECT_NEAR(mse(p, t), s / 100.0, 1e-15);
  EXPECT_THROW(mse(std::vector<double>{1.0}, b), DataError);
}

TEST(SeedPlan, SubSeedsAreDistinctAndStable) {
  const SeedPlan a = SeedPlan::from(3), b = SeedPlan::from(3), c = SeedPlan::from(4);
  EXPECT_EQ(a.split, b.split);
  EXPECT_NE(a.split, c.split);
  EXPECT_NE(a.split, a.candidates);
  EXPECT_NE(a.interpolator, a.regressor);
}

TEST(CellStats, PopulationStd) {
  const CellStats s = CellStats::of({1.0, 3.0});
  EXPECT_EQ(s.mean, 2.0);
  EXPECT_EQ(s.std, 1.0);
  EXPECT_EQ(s.per_seed.size(), 2u);
}

TEST(RunMatrix, ZeroAddedGivesIdenticalColumns) {
  const Dataset d = synthetic(80, 1);
  const auto rep = run_matrix(d, all_methods(), {RegressorSpec::lr(), RegressorSpec::knn()}, 0, small_config(2));
  ASSERT_EQ(rep.columns.size(), 9u);
  for (const auto& r : rep.regressors) {
    for (const auto& c : rep.columns) EXPECT_EQ(rep.cell(r, c).per_seed, rep.cell(r, "Base").per_seed) << c;
  }
}

TEST(RunMatrix, ShapeAndReportFormats) {
  const Dataset d = synthetic(60, 2);
  const std::vector<RegressorSpec> regs{RegressorSpec::lr(), RegressorSpec::rr(), RegressorSpec::knn(),
                                        RegressorSpec::mlp({8}, 5)};
  const auto rep = run_matrix(d, all_methods(), regs, 0, small_config(1));
  std::size_t cells = 0;
  for (const auto& row : rep.cells) cells += row.size();
  EXPECT_EQ(cells, 36u);
  const std::string csv = rep.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "regressor,column,mse_mean,mse_std,mse_per_seed");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 37);
  EXPECT_NE(rep.to_text().find("COKR-SPHE"), std::string::npos);
  EXPECT_THROW(rep.cell("SVR", "Base"), ConfigError);
}

TEST(RunMatrix, DeterministicAndParallelInvariant) {
  const Dataset d = synthetic(70, 3);
  auto cfg = small_config(2);
  const std::vector<Method> methods{Method::gp_rbf, Method::cokr_exp};
  const auto a = run_matrix(d, methods, {RegressorSpec::knn()}, 30, cfg);
  cfg.jobs = 3;
  const auto b = run_matrix(d, methods, {RegressorSpec::knn()}, 30, cfg);
  EXPECT_EQ(a.to_csv(), b.to_csv());
}

TEST(RunMatrix, RejectsAugmentedBaseAndAnnotatesFailures) {
  Dataset d = synthetic(40, 4);
  const Dataset aug = d.appended({fixtures::sample(55.5, -21.0, 5.0)}, Provenance::augmented);
  EXPECT_THROW(run_matrix(aug, {}, {RegressorSpec::lr()}, 0, small_config(1)), DataError);
  auto cfg = small_config(1);
  cfg.provider = AuxProviderSpec::grid_file("/nonexistent/grid.json");
  try {
    run_matrix(d, {Method::cokr_lin}, {RegressorSpec::lr()}, 10, cfg);
    FAIL() << "expected a provider error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::provider);
    EXPECT_EQ(std::string(e.what()).rfind("seed 0: ", 0), 0u) << e.what();
  }
}

TEST(RunSweep, GridZeroEqualsBaseAndFormats) {
  const Dataset d = synthetic(60, 5);
  auto cfg = small_config(2);
  const auto sw = run_sweep(d, {Method::cokr_gau, Method::gp_lin}, RegressorSpec::lr(), {0, 20}, cfg);
  const auto base = run_matrix(d, {}, {RegressorSpec::lr()}, 0, cfg);
  for (const auto& s : sw.series) EXPECT_EQ(s.points[0].mse.per_seed, base.cell("LR", "Base").per_seed);
  EXPECT_EQ(sw.of("GP-LIN").points.size(), 2u);
  EXPECT_EQ(sw.to_csv().substr(0, 6), "method");
  EXPECT_THROW(run_sweep(d, {Method::gp_lin}, RegressorSpec::lr(), {10, 20}, cfg), ConfigError);
  EXPECT_EQ(default_sweep_grid(), (std::vector<std::size_t>{0, 50, 100, 150, 200, 250, 300}));
}

TEST(Kde, SingleBumpAndNormalization) {
  const Dataset d = Dataset::observed({fixtures::sample(55.5, -21.1, 30.0)});
  const BoundingBox box{55.3, 55.7, -21.3, -20.9};
  KdeOptions o;
  o.nx = 41;
  o.ny = 41;
  o.bandwidth_lon = 0.03;
  o.bandwidth_lat = 0.03;
  const DensityMap m = kde_density(d, box, o);
  std::size_t best = 0;
  for (std::size_t k = 1; k < m.values.size(); ++k)
    if (m.values[k] > m.values[best]) best = k;
  EXPECT_EQ(best % 41, 20u);
  EXPECT_EQ(best / 41, 20u);
  EXPECT_NEAR(m.integral(), 1.0, 1e-12);
  EXPECT_THROW(kde_density(Dataset::observed({fixtures::sample(55.5, -21.1, 0.0)}), box, o), DataError);
}

TEST(Kde, TwoEqualModes) {
  const Dataset d =
      Dataset::observed({fixtures::sample(55.4, -21.1, 50.0), fixtures::sample(55.6, -21.1, 50.0)});
  const BoundingBox box{55.3, 55.7, -21.3, -20.9};
  KdeOptions o;
  o.nx = 40;
  o.ny = 40;
  o.bandwidth_lon = 0.02;
  o.bandwidth_lat = 0.02;
  const DensityMap m = kde_density(d, box, o);
  // Cell i and cell 39 - i mirror each other around 55.5.
  for (std::size_t j = 0; j < 40; ++j) EXPECT_NEAR(m.at(9, j), m.at(30, j), 1e-9 * m.at(9, j) + 1e-300);
}

TEST(Kde, SyntheticRasterIntegratesToOneAndRoundTrips) {
  const Dataset d = synthetic(200, 6);
  const RegionMask mask = fixtures::island_mask();
  const DensityMap m = kde_density(d, mask.bounding_box());
  EXPECT_NEAR(m.integral(), 1.0, 1e-6);
  const auto stem = std::filesystem::temp_directory_path() / "geoaug_kde";
  m.write_raster(stem);
  const DensityMap back = DensityMap::read_raster(stem);
  EXPECT_EQ(back.values, m.values);
  EXPECT_EQ(back.nx, m.nx);
  m.write_pgm(std::filesystem::temp_directory_path() / "geoaug_kde.pgm");
  EXPECT_GT(std::filesystem::file_size(std::filesystem::temp_directory_path() / "geoaug_kde.pgm"), 100u * 100u);
}

namespace {

RegionMask quad_zone_mask() {
  const Ring outer{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  return RegionMask({outer}, {{"SW", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}},
                              {"SE", {{1, 0}, {2, 0}, {2, 1}, {1, 1}}},
                              {"NW", {{0, 1}, {1, 1}, {1, 2}, {0, 2}}},
                              {"East", {{1, 1}, {2, 1}, {2, 2}, {1, 2}}}});
}

GeoSample at(double lon, double lat, double cover) {
  GeoSample s = fixtures::sample(lon, lat, cover);
  return s;
}

Dataset quad_base() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 0.95), c(10.0, 40.0);
  std::vector<GeoSample> v;
  for (double ox : {0.0, 1.0})
    for (double oy : {0.0, 1.0})
      for (int i = 0; i < 15; ++i) v.push_back(at(ox + u(rng), oy + u(rng), c(rng)));
  return Dataset::observed(v);
}

}  // namespace

TEST(ZoneOverlap, IdentityIsExactlyZero) {
  const Dataset base = quad_base();
  const auto rep = zone_overlap_diff(base, base, quad_zone_mask(), "GP-RBF");
  ASSERT_EQ(rep.rows.size(), 4u);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.delta, 0.0);
    EXPECT_FALSE(r.significant);
    EXPECT_EQ(r.n_added, 0u);
  }
}

TEST(ZoneOverlap, ConcentratedAdditionMovesOnlyThatZone) {
  const Dataset base = quad_base();
  std::vector<GeoSample> extra;
  for (int i = 0; i < 10; ++i) extra.push_back(at(1.1 + 0.08 * i, 1.5, 100.0));
  const Dataset aug = base.appended(extra, Provenance::augmented);
  ZoneTestOptions o;
  o.seed = 3;
  const auto rep = zone_overlap_diff(base, aug, quad_zone_mask(), "GP-RBF", o);
  EXPECT_GT(rep.at("East", "GP-RBF").delta, 0.0);
  EXPECT_TRUE(rep.at("East", "GP-RBF").significant);
  EXPECT_LT(rep.at("East", "GP-RBF").p_value, 0.05);
  for (const char* z : {"SW", "SE", "NW"}) {
    EXPECT_EQ(rep.at(z, "GP-RBF").delta, 0.0);
    EXPECT_FALSE(rep.at(z, "GP-RBF").significant);
  }
  const std::string csv = rep.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "zone,method,delta,p_value,significant,n_base,n_added");
  ZoneOverlapReport all;
  append_rows(all, rep);
  append_rows(all, zone_overlap_diff(base, base, quad_zone_mask(), "COKR-LIN"));
  EXPECT_EQ(all.rows.size(), 8u);
}

TEST(ZoneOverlap, EmptyBaseZoneIsAnError) {
  const Dataset base = Dataset::observed({at(0.5, 0.5, 10.0)});
  EXPECT_THROW(zone_overlap_diff(base, base, quad_zone_mask()), DataError);
}
