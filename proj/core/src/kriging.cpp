#include "geoaug/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

double variance_of(const Vector& v) {
  if (v.size() == 0) return 0.0;
  return (v.array() - v.mean()).square().mean();
}

/// Averages values that share an identical site, keeping first-seen order.
std::pair<std::vector<LonLat>, Vector> merge_sites(const std::vector<LonLat>& sites, const Vector& values) {
  std::map<std::pair<double, double>, std::size_t> index;
  std::vector<LonLat> out_sites;
  std::vector<double> sums;
  std::vector<double> counts;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto key = std::make_pair(sites[i].lon, sites[i].lat);
    auto [it, inserted] = index.emplace(key, out_sites.size());
    if (inserted) {
      out_sites.push_back(sites[i]);
      sums.push_back(0.0);
      counts.push_back(0.0);
    }
    sums[it->second] += values(static_cast<Index>(i));
    counts[it->second] += 1.0;
  }
  Vector merged(static_cast<Index>(out_sites.size()));
  for (std::size_t i = 0; i < out_sites.size(); ++i) merged(static_cast<Index>(i)) = sums[i] / counts[i];
  return {std::move(out_sites), std::move(merged)};
}

std::vector<LonLat> sites_of(const Dataset& d) {
  std::vector<LonLat> out;
  out.reserve(d.size());
  for (const auto& s : d.samples()) out.push_back({s.longitude, s.latitude});
  return out;
}

VariogramFit fit_on(const std::vector<LonLat>& sites, const Vector& values, VariogramKind kind,
                    const VariogramFitOptions& vopts, EmpiricalVariogram& ev) {
  ev = empirical_semivariogram(sites, std::span<const double>(values.data(), static_cast<std::size_t>(values.size())),
                               vopts.n_bins, vopts.max_lag);
  constexpr double kFlatVariance = 1e-12;
  const double var = variance_of(values);
  const VariogramGrid grid = vopts.grid ? *vopts.grid : VariogramGrid::defaults(ev, var > kFlatVariance ? var : 0.0);
  return fit_variogram(ev, kind, grid);
}

/// Builds the model, raising the nugget when the system is singular (smooth
/// variograms on dense sites). The fit records the nugget actually used.
template <typename Build>
KrigingModel build_with_nugget_floor(VariogramFit& fit, double max_lag, Build build) {
  const double scale = std::max(model_eval(fit.params, max_lag), 1e-300);
  for (double f = 1e-10;; f *= 100.0) {
    try {
      return build(fit.params);
    } catch (const NumericError&) {
      if (f > 1e-2) throw;
      fit.params.nugget = std::max(fit.params.nugget, f * scale);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Drift

DriftOptions DriftOptions::only(const std::vector<std::string>& names) {
  DriftOptions o{false, false, false, false, false, false};
  for (const auto& n : names) {
    if (n == "altitude") o.altitude = true;
    else if (n == "avg_temperature") o.avg_temperature = true;
    else if (n == "precipitation") o.precipitation = true;
    else if (n == "luminance") o.luminance = true;
    else if (n == "month") o.month = true;
    else if (n == "year") o.year = true;
    else throw ConfigError("unknown drift covariate '" + n + "'");
  }
  return o;
}

std::vector<std::string> drift_columns(const DriftOptions& o) {
  std::vector<std::string> c{"intercept"};
  if (o.altitude) c.emplace_back("altitude");
  if (o.avg_temperature) c.emplace_back("avg_temperature");
  if (o.precipitation) c.emplace_back("precipitation");
  if (o.luminance) c.emplace_back("luminance");
  if (o.month) {
    c.emplace_back("month_sin");
    c.emplace_back("month_cos");
  }
  if (o.year) c.emplace_back("year");
  return c;
}

Vector drift_row(const GeoSample& s, const DriftOptions& o) {
  std::vector<double> v{1.0};
  if (o.altitude) v.push_back(s.altitude);
  if (o.avg_temperature) v.push_back(s.avg_temperature);
  if (o.precipitation) v.push_back(s.precipitation);
  if (o.luminance) v.push_back(s.luminance);
  if (o.month) {
    const double angle = 2.0 * std::numbers::pi * s.month / 12.0;
    v.push_back(std::sin(angle));
    v.push_back(std::cos(angle));
  }
  if (o.year) v.push_back(static_cast<double>(s.year - 2013));
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

double DriftFit::predict(const GeoSample& s) const { return drift_row(s, options).dot(coefficients); }

DriftFit fit_ols(const Matrix& design, const Vector& y, const std::vector<std::string>& columns) {
  const Index n = design.rows();
  const Index p = design.cols();
  if (y.size() != n) throw DataError("ols: design and target lengths differ");
  if (static_cast<Index>(columns.size()) != p) throw ConfigError("ols: column names do not match the design");
  if (n < p) throw DataError("ols: fewer samples than columns");

  Matrix q = design;
  Matrix r = Matrix::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    const double original = design.col(j).norm();
    for (Index i = 0; i < j; ++i) {
      r(i, j) = q.col(i).dot(q.col(j));
      q.col(j) -= r(i, j) * q.col(i);
    }
    const double remaining = q.col(j).norm();
    if (!(original > 0.0) || remaining <= 1e-10 * original) {
      throw NumericError("ols: rank-deficient design, column '" + columns[static_cast<std::size_t>(j)] +
                         "' is a linear combination of the preceding columns");
    }
    r(j, j) = remaining;
    q.col(j) /= remaining;
  }
  const Vector qty = q.transpose() * y;
  DriftFit fit;
  fit.columns = columns;
  fit.coefficients = r.triangularView<Eigen::Upper>().solve(qty);
  fit.residuals = y - design * fit.coefficients;
  const double ss_tot = (y.array() - y.mean()).square().sum();
  const double ss_res = fit.residuals.squaredNorm();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  return fit;
}

DriftFit fit_regression_drift(const Dataset& samples, const DriftOptions& opts) {
  const auto columns = drift_columns(opts);
  const std::size_t p = columns.size() - 1;
  if (samples.size() < p + 2) {
    throw DataError("regression drift: need at least " + std::to_string(p + 2) + " samples, got " +
                    std::to_string(samples.size()));
  }
  Matrix x(static_cast<Index>(samples.size()), static_cast<Index>(columns.size()));
  Vector y(static_cast<Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    x.row(static_cast<Index>(i)) = drift_row(samples[i], opts).transpose();
    y(static_cast<Index>(i)) = samples[i].cover;
  }
  DriftFit fit = fit_ols(x, y, columns);
  fit.options = opts;
  return fit;
}

// ---------------------------------------------------------------------------
// Kriging

const char* to_string(KrigingVariant v) noexcept {
  switch (v) {
    case KrigingVariant::simple: return "simple";
    case KrigingVariant::ordinary: return "ordinary";
    case KrigingVariant::regression: return "regression";
  }
  return "?";
}

void check_distinct_sites(const std::vector<LonLat>& sites, double tol) {
  std::vector<std::size_t> order(sites.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sites[a].lon < sites[b].lon; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (sites[order[j]].lon - sites[order[i]].lon > tol) break;
      if (distance(sites[order[i]], sites[order[j]]) <= tol) {
        throw DataError("kriging: duplicate sites " + std::to_string(std::min(order[i], order[j])) + " and " +
                        std::to_string(std::max(order[i], order[j])));
      }
    }
  }
}

KrigingModel::KrigingModel(KrigingVariant variant, VariogramParams variogram, std::vector<LonLat> sites,
                           Vector targets)
    : variant_(variant), variogram_(variogram), sites_(std::move(sites)), targets_(std::move(targets)) {
  variogram_.validate();
  if (sites_.empty()) throw DataError("kriging: no observation sites");
  if (static_cast<Index>(sites_.size()) != targets_.size()) throw DataError("kriging: sites and values differ");
  for (const auto& s : sites_) {
    if (!std::isfinite(s.lon) || !std::isfinite(s.lat)) throw DataError("kriging: non-finite site");
  }
  if (!targets_.allFinite()) throw DataError("kriging: non-finite target");
  check_distinct_sites(sites_);

  const auto n = static_cast<Index>(sites_.size());
  if (variant_ == KrigingVariant::simple) {
    Matrix sigma(n, n);
    for (Index i = 0; i < n; ++i) {
      sigma(i, i) = cov_from_variogram(variogram_, 0.0);
      for (Index j = 0; j < i; ++j) {
        sigma(i, j) = sigma(j, i) = cov_from_variogram(variogram_, distance(sites_[static_cast<std::size_t>(i)],
                                                                             sites_[static_cast<std::size_t>(j)]));
      }
    }
    chol_.emplace(cholesky(sigma, JitterSchedule::none()));
    return;
  }
  Matrix a = Matrix::Zero(n + 1, n + 1);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      a(i, j) = a(j, i) =
          model_eval(variogram_, distance(sites_[static_cast<std::size_t>(i)], sites_[static_cast<std::size_t>(j)]));
    }
    a(i, n) = a(n, i) = 1.0;
  }
  system_ = a;
  try {
    lu_.emplace(std::move(a));
  } catch (const NumericError& e) {
    throw NumericError(std::string("kriging: singular variogram system (") + e.what() + ")");
  }
}

KrigingModel KrigingModel::simple(VariogramParams variogram, std::vector<LonLat> sites, Vector values,
                                  double mean) {
  if (!variogram.has_sill()) throw NumericError("simple kriging needs a variogram with a finite sill");
  if (!std::isfinite(mean)) throw DataError("simple kriging: non-finite mean");
  KrigingModel m(KrigingVariant::simple, variogram, std::move(sites), std::move(values));
  m.mean_ = mean;
  return m;
}

KrigingModel KrigingModel::ordinary(VariogramParams variogram, std::vector<LonLat> sites, Vector values) {
  return KrigingModel(KrigingVariant::ordinary, variogram, std::move(sites), std::move(values));
}

KrigingModel KrigingModel::regression(VariogramParams variogram, std::vector<LonLat> sites, DriftFit drift) {
  Vector residuals = drift.residuals;
  KrigingModel m(KrigingVariant::regression, variogram, std::move(sites), std::move(residuals));
  m.drift_ = std::move(drift);
  return m;
}

KrigingWeights KrigingModel::solve_weights(const LonLat& x) const {
  if (!std::isfinite(x.lon) || !std::isfinite(x.lat)) throw DataError("kriging: non-finite query site");
  const auto n = static_cast<Index>(sites_.size());
  KrigingWeights w;
  if (variant_ == KrigingVariant::simple) {
    Vector rhs(n);
    for (Index i = 0; i < n; ++i) rhs(i) = cov_from_variogram(variogram_, distance(x, sites_[static_cast<std::size_t>(i)]));
    w.lambda = chol_->solve(rhs);
    return w;
  }
  Vector rhs(n + 1);
  for (Index i = 0; i < n; ++i) rhs(i) = model_eval(variogram_, distance(x, sites_[static_cast<std::size_t>(i)]));
  rhs(n) = 1.0;
  Vector sol = lu_->solve(rhs);
  // One refinement step with the residual accumulated in extended precision.
  Vector r(n + 1);
  for (Index i = 0; i <= n; ++i) {
    long double acc = rhs(i);
    for (Index j = 0; j <= n; ++j) acc -= static_cast<long double>(system_(i, j)) * sol(j);
    r(i) = static_cast<double>(acc);
  }
  sol += lu_->solve(r);
  w.lambda = sol.head(n);
  w.lagrange = sol(n);
  return w;
}

KrigingPrediction KrigingModel::predict_point(const LonLat& x, const GeoSample* covariates) const {
  if (variant_ == KrigingVariant::regression && covariates == nullptr) {
    throw DataError("regression kriging: auxiliaries required at the query site");
  }
  const KrigingWeights w = solve_weights(x);
  const auto n = static_cast<Index>(sites_.size());
  KrigingPrediction p;
  if (variant_ == KrigingVariant::simple) {
    p.estimate = mean_ + w.lambda.dot((targets_.array() - mean_).matrix());
    double explained = 0.0;
    for (Index i = 0; i < n; ++i) {
      explained += w.lambda(i) * cov_from_variogram(variogram_, distance(x, sites_[static_cast<std::size_t>(i)]));
    }
    p.variance = std::max(0.0, variogram_.sill() - explained);
    return p;
  }
  p.estimate = w.lambda.dot(targets_);
  double var = w.lagrange;
  for (Index i = 0; i < n; ++i) var += w.lambda(i) * model_eval(variogram_, distance(x, sites_[static_cast<std::size_t>(i)]));
  p.variance = std::max(0.0, var);
  if (variant_ == KrigingVariant::regression) p.estimate += drift_->predict(*covariates);
  return p;
}

nlohmann::ordered_json KrigingModel::to_json() const {
  nlohmann::ordered_json j;
  j["variant"] = to_string(variant_);
  j["variogram"] = variogram_.to_json();
  j["n_sites"] = sites_.size();
  if (variant_ == KrigingVariant::simple) j["mean"] = mean_;
  if (drift_) {
    nlohmann::ordered_json d;
    for (std::size_t i = 0; i < drift_->columns.size(); ++i) {
      d[drift_->columns[i]] = drift_->coefficients(static_cast<Index>(i));
    }
    j["drift"] = d;
    j["drift_r_squared"] = drift_->r_squared;
  }
  return j;
}

FittedKriging fit_ordinary_kriging(const Dataset& d, VariogramKind kind, const VariogramFitOptions& vopts) {
  if (d.empty()) throw DataError("kriging: empty dataset");
  const auto covers = d.covers();
  auto [sites, values] = merge_sites(sites_of(d), Eigen::Map<const Vector>(covers.data(), static_cast<Index>(covers.size())));
  EmpiricalVariogram ev;
  VariogramFit fit = fit_on(sites, values, kind, vopts, ev);
  KrigingModel model = build_with_nugget_floor(
      fit, ev.max_lag, [&](const VariogramParams& p) { return KrigingModel::ordinary(p, sites, values); });
  return {std::move(model), std::move(ev), fit};
}

FittedKriging fit_regression_kriging(const Dataset& d, VariogramKind kind, const DriftOptions& dopts,
                                     const VariogramFitOptions& vopts) {
  DriftFit drift = fit_regression_drift(d, dopts);
  auto [sites, residuals] = merge_sites(sites_of(d), drift.residuals);
  EmpiricalVariogram ev;
  VariogramFit fit = fit_on(sites, residuals, kind, vopts, ev);
  drift.residuals = residuals;
  KrigingModel model = build_with_nugget_floor(
      fit, ev.max_lag, [&](const VariogramParams& p) { return KrigingModel::regression(p, sites, drift); });
  return {std::move(model), std::move(ev), fit};
}

}  // namespace geoaug
