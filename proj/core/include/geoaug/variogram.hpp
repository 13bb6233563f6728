#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoaug/region_mask.hpp"

namespace geoaug {

enum class VariogramKind { linear, exponential, gaussian, spherical };

const char* to_string(VariogramKind k) noexcept;
VariogramKind parse_variogram_kind(const std::string& name);

/// Nugget C0, partial sill C and range a; the linear model uses C0 and a
/// slope b instead of (C, a).
struct VariogramParams {
  VariogramKind kind = VariogramKind::exponential;
  double nugget = 0.0;
  double partial_sill = 0.0;
  double range = 1.0;
  double slope = 0.0;

  static VariogramParams linear(double nugget, double slope);
  static VariogramParams bounded(VariogramKind kind, double nugget, double partial_sill, double range);

  bool has_sill() const noexcept { return kind != VariogramKind::linear; }
  /// C0 + C. Throws for the linear model.
  double sill() const;
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static VariogramParams from_json(const nlohmann::json& j);
};

/// gamma(h); exactly 0 at h = 0, tends to C0 as h -> 0+.
double model_eval(const VariogramParams& p, double h);

/// C(h) = sill - gamma(h). Throws NumericError for the linear model.
double cov_from_variogram(const VariogramParams& p, double h);

struct LagBin {
  double h_center = 0.0;
  double gamma = 0.0;
  std::size_t pair_count = 0;
};

struct EmpiricalVariogram {
  std::vector<LagBin> bins;
  double max_lag = 0.0;
  std::size_t n_bins = 0;

  /// Two columns (h, gamma) with a header line.
  std::string to_csv() const;
};

/// Matheron estimator over equal-width lag bins on (0, max_lag]. Distances
/// are Euclidean in degrees. Empty bins are dropped. When max_lag is not
/// given it defaults to half the largest pairwise distance.
EmpiricalVariogram empirical_semivariogram(std::span<const LonLat> points, std::span<const double> values,
                                           std::size_t n_bins = 15, std::optional<double> max_lag = std::nullopt);

/// Candidate values for an exhaustive fit. `slopes` is used only by the
/// linear model, `partial_sills` and `ranges` only by the others.
struct VariogramGrid {
  std::vector<double> nuggets;
  std::vector<double> partial_sills;
  std::vector<double> ranges;
  std::vector<double> slopes;

  /// C0 in {0, .05, .1, .2} var, C in {.5, .8, 1, 1.2} var, ten log-spaced
  /// ranges between the first bin centre and max_lag, and slopes var / a for
  /// each such range.
  static VariogramGrid defaults(const EmpiricalVariogram& ev, double var_y);
};

struct VariogramFit {
  VariogramParams params;
  /// sum_b N_b (gamma_b - model(h_b))^2
  double error = 0.0;
};

/// Minimizes the pair-weighted squared error over the grid. Ties go to the
/// smallest nugget, then the smallest range (or slope), then the smallest
/// partial sill.
VariogramFit fit_variogram(const EmpiricalVariogram& ev, VariogramKind kind, const VariogramGrid& grid);

}  // namespace geoaug
