#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoaug/augment.hpp"
#include "geoaug/geodata.hpp"
#include "geoaug/region_mask.hpp"
#include "geoaug/regressors.hpp"

namespace geoaug {

double mse(std::span<const double> predictions, std::span<const double> targets);
double mse(const Vector& predictions, const Vector& targets);

/// Everything an experiment needs besides the data, methods and models.
struct ExperimentConfig {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  double test_fraction = 0.3;
  FeatureOptions features{};
  RegionMask mask;
  AuxProviderSpec provider{};
  int year_min = 2015;
  int year_max = 2019;
  bool clamp = true;
  bool sample = false;
  InterpolatorOptions interpolator{};
  /// Concurrent (seed, method) tasks.
  unsigned jobs = 1;
};

/// Sub-seeds derived from one repetition seed.
struct SeedPlan {
  std::uint64_t split;
  std::uint64_t candidates;
  std::uint64_t interpolator;
  std::uint64_t regressor;

  static SeedPlan from(std::uint64_t seed);
};

struct CellStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over seeds
  std::vector<double> per_seed;

  static CellStats of(std::vector<double> values);
};

/// Test MSE per regressor (rows) and training set (columns: "Base" then
/// one per interpolation method).
struct EvalReport {
  std::vector<std::string> regressors;
  std::vector<std::string> columns;
  std::vector<std::vector<CellStats>> cells;  // [row][column]
  std::vector<std::uint64_t> seeds;
  double test_fraction = 0.3;
  std::size_t n_added = 0;

  const CellStats& cell(const std::string& regressor, const std::string& column) const;

  /// Long format: regressor,column,mse_mean,mse_std,seeds
  std::string to_csv() const;
  /// Wide mean(std) table, one row per regressor.
  std::string to_text() const;
};

/// For every seed: split the observed data, augment the training part only
/// (one candidate set per seed, shared by all methods), scale features on
/// the observed training rows, fit each regressor, and score it on the
/// untouched observed test part.
EvalReport run_matrix(const Dataset& base, const std::vector<Method>& methods,
                      const std::vector<RegressorSpec>& regressors, std::size_t n_added,
                      const ExperimentConfig& cfg);

struct SweepPoint {
  std::size_t n_added = 0;
  CellStats mse;
};

struct SweepSeries {
  std::string method;
  std::vector<SweepPoint> points;
};

struct SweepReport {
  std::string regressor;
  std::vector<std::size_t> grid;
  std::vector<SweepSeries> series;
  std::vector<std::uint64_t> seeds;

  const SweepSeries& of(const std::string& method) const;

  /// method,n_added,mse_mean,mse_std
  std::string to_csv() const;
  std::string to_text() const;
};

/// The split is fixed per seed and the interpolator fitted once per
/// (seed, method); the added points for n are the first n of the largest
/// grid value.
SweepReport run_sweep(const Dataset& base, const std::vector<Method>& methods, const RegressorSpec& regressor,
                      const std::vector<std::size_t>& grid, const ExperimentConfig& cfg);

/// Default sweep grid {0, 50, ..., 300}.
std::vector<std::size_t> default_sweep_grid();

// ---------------------------------------------------------------------------
// Density maps

/// Cover-weighted Gaussian KDE over (lon, lat), evaluated at cell centres
/// of a raster over `extent`. Row j holds latitude lat_min + (j + 1/2) dy.
struct DensityMap {
  BoundingBox extent;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double bandwidth_lon = 0.0;
  double bandwidth_lat = 0.0;
  std::vector<double> values;  // ny * nx, row-major

  double cell_area() const;
  double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
  /// sum(values) * cell_area
  double integral() const;

  nlohmann::ordered_json header() const;
  /// `<stem>.json` header plus `<stem>.f64` little-endian doubles.
  void write_raster(const std::filesystem::path& stem) const;
  static DensityMap read_raster(const std::filesystem::path& stem);
  /// 8-bit binary PGM, north up, scaled to the maximum value.
  void write_pgm(const std::filesystem::path& path) const;
};

struct KdeOptions {
  std::size_t nx = 100;
  std::size_t ny = 100;
  /// Overrides for Scott's rule n^(-1/6) * std per axis.
  std::optional<double> bandwidth_lon;
  std::optional<double> bandwidth_lat;
};

DensityMap kde_density(const Dataset& d, const BoundingBox& extent, const KdeOptions& opts = {});

// ---------------------------------------------------------------------------
// Zone overlap

struct ZoneTestOptions {
  std::size_t permutations = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

struct ZoneOverlapRow {
  std::string zone;
  std::string method;
  double delta = 0.0;
  double p_value = 1.0;
  bool significant = false;
  std::size_t n_base = 0;
  std::size_t n_added = 0;
};

struct ZoneOverlapReport {
  std::vector<ZoneOverlapRow> rows;

  const ZoneOverlapRow& at(const std::string& zone, const std::string& method) const;
  /// zone,method,delta,p_value,significant,n_base,n_added
  std::string to_csv() const;
};

/// delta(zone) = mean cover of the augmented dataset inside the zone minus
/// that of the base dataset. Significance: two-sided permutation test that
/// relabels the zone's base and added (provenance `augmented`) points,
/// p = (1 + #{|delta_perm| >= |delta|}) / (1 + permutations).
ZoneOverlapReport zone_overlap_diff(const Dataset& base, const Dataset& augmented, const RegionMask& mask,
                                    const std::string& method = "", const ZoneTestOptions& opts = {});

/// Concatenates per-method reports.
void append_rows(ZoneOverlapReport& into, const ZoneOverlapReport& from);

}  // namespace geoaug
