#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoaug/geodata.hpp"
#include "geoaug/numcore.hpp"
#include "geoaug/region_mask.hpp"
#include "geoaug/variogram.hpp"

namespace geoaug {

// ---------------------------------------------------------------------------
// Linear drift on auxiliaries

/// Which covariates enter the drift; the intercept is always present.
struct DriftOptions {
  bool altitude = true;
  bool avg_temperature = true;
  bool precipitation = true;
  bool luminance = true;
  bool month = true;  // sin/cos pair
  bool year = true;   // year - 2013

  static DriftOptions only(const std::vector<std::string>& names);
};

std::vector<std::string> drift_columns(const DriftOptions& opts);
/// [1, selected covariates...] for one sample (cover is ignored).
Vector drift_row(const GeoSample& s, const DriftOptions& opts);

struct DriftFit {
  DriftOptions options;
  std::vector<std::string> columns;
  Vector coefficients;
  Vector residuals;  // y - X beta on the fitting data
  double r_squared = 0.0;

  double predict(const GeoSample& s) const;
};

/// Ordinary least squares by modified Gram-Schmidt. Throws NumericError
/// naming the first column that is (numerically) a combination of the
/// preceding ones.
DriftFit fit_ols(const Matrix& design, const Vector& y, const std::vector<std::string>& columns);

/// OLS of cover on the drift covariates. Needs at least p + 2 samples.
DriftFit fit_regression_drift(const Dataset& samples, const DriftOptions& opts = {});

// ---------------------------------------------------------------------------
// Kriging

enum class KrigingVariant { simple, ordinary, regression };

const char* to_string(KrigingVariant v) noexcept;

struct KrigingWeights {
  Vector lambda;
  double lagrange = 0.0;  // ordinary and regression variants only
};

struct KrigingPrediction {
  double estimate = 0.0;
  double variance = 0.0;
};

/// Kriging predictor over (lon, lat) sites. Immutable; the kriging matrix
/// is factored once at construction.
///
/// Simple kriging solves the covariance system, the other variants the
/// bordered variogram system, so linear variograms work there. The
/// semivariogram is 0 at zero lag, which makes every variant an exact
/// interpolator at the observed sites.
class KrigingModel {
 public:
  static KrigingModel simple(VariogramParams variogram, std::vector<LonLat> sites, Vector values, double mean);
  static KrigingModel ordinary(VariogramParams variogram, std::vector<LonLat> sites, Vector values);
  /// Ordinary kriging of drift.residuals plus the drift at query time.
  static KrigingModel regression(VariogramParams variogram, std::vector<LonLat> sites, DriftFit drift);

  KrigingVariant variant() const noexcept { return variant_; }
  const VariogramParams& variogram() const noexcept { return variogram_; }
  const std::vector<LonLat>& sites() const noexcept { return sites_; }
  /// Observed values (simple, ordinary) or drift residuals (regression).
  const Vector& targets() const noexcept { return targets_; }
  const std::optional<DriftFit>& drift() const noexcept { return drift_; }
  double known_mean() const noexcept { return mean_; }

  KrigingWeights solve_weights(const LonLat& x) const;

  /// `covariates` supplies auxiliaries and date for the regression drift
  /// and is required for that variant only.
  KrigingPrediction predict_point(const LonLat& x, const GeoSample* covariates = nullptr) const;

  nlohmann::ordered_json to_json() const;

 private:
  KrigingModel(KrigingVariant variant, VariogramParams variogram, std::vector<LonLat> sites, Vector targets);

  KrigingVariant variant_;
  VariogramParams variogram_;
  std::vector<LonLat> sites_;
  Vector targets_;
  double mean_ = 0.0;
  std::optional<DriftFit> drift_;
  std::optional<CholeskyFactor> chol_;
  std::optional<LuFactor> lu_;
  Matrix system_;
};

/// Throws DataError if two sites are closer than `tol` degrees.
void check_distinct_sites(const std::vector<LonLat>& sites, double tol = 1e-10);

struct VariogramFitOptions {
  std::size_t n_bins = 15;
  std::optional<double> max_lag;
  /// Replaces the default grid when set.
  std::optional<VariogramGrid> grid;
};

struct FittedKriging {
  KrigingModel model;
  EmpiricalVariogram empirical;
  VariogramFit fit;
};

/// Fits the variogram on the cover values and builds an ordinary model.
/// Samples sharing a site are merged by averaging their values.
FittedKriging fit_ordinary_kriging(const Dataset& d, VariogramKind kind, const VariogramFitOptions& vopts = {});

/// Regression kriging: drift OLS, variogram of the residuals, ordinary
/// kriging of the residuals. Residuals at a shared site are averaged.
FittedKriging fit_regression_kriging(const Dataset& d, VariogramKind kind, const DriftOptions& dopts = {},
                                     const VariogramFitOptions& vopts = {});

}  // namespace geoaug
