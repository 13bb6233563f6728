#include "geoaug/augment.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>

#include "geoaug/errors.hpp"
#include "geoaug/hash.hpp"

namespace geoaug {

namespace {

std::string normalize_name(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '_') c = '-';
    out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

VariogramKind variogram_kind(Method m) {
  switch (m) {
    case Method::cokr_lin: return VariogramKind::linear;
    case Method::cokr_exp: return VariogramKind::exponential;
    case Method::cokr_gau: return VariogramKind::gaussian;
    case Method::cokr_sphe: return VariogramKind::spherical;
    default: break;
  }
  throw ConfigError("not a kriging method");
}

BaseKind base_kind(Method m) {
  switch (m) {
    case Method::gp_rbf: return BaseKind::rbf;
    case Method::gp_lin: return BaseKind::lin;
    case Method::gp_quad: return BaseKind::quad;
    default: break;
  }
  throw ConfigError("not a single-kernel GP method");
}

Vector cover_vector(const Dataset& d) {
  const auto c = d.covers();
  return Eigen::Map<const Vector>(c.data(), static_cast<Index>(c.size()));
}

}  // namespace

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::gp_rbf: return "GP-RBF";
    case Method::gp_lin: return "GP-LIN";
    case Method::gp_quad: return "GP-QUAD";
    case Method::gp_comb: return "GP-COMB";
    case Method::cokr_lin: return "COKR-LIN";
    case Method::cokr_exp: return "COKR-EXP";
    case Method::cokr_gau: return "COKR-GAU";
    case Method::cokr_sphe: return "COKR-SPHE";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  const std::string n = normalize_name(name);
  for (Method m : all_methods()) {
    if (n == to_string(m)) return m;
  }
  throw ConfigError("unknown interpolation method '" + name + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::gp_rbf,   Method::gp_lin,   Method::gp_quad,  Method::gp_comb,
                                           Method::cokr_lin, Method::cokr_exp, Method::cokr_gau, Method::cokr_sphe};
  return methods;
}

bool is_gp(Method m) noexcept {
  return m == Method::gp_rbf || m == Method::gp_lin || m == Method::gp_quad || m == Method::gp_comb;
}

// ---------------------------------------------------------------------------
// Interpolator

Interpolator Interpolator::fit(const Dataset& base, Method method, const InterpolatorOptions& opts,
                               std::uint64_t seed) {
  if (base.empty()) throw DataError("interpolator: empty base dataset");
  Interpolator out;
  out.method_ = method;
  if (!is_gp(method)) {
    out.kriging_ = std::make_shared<const FittedKriging>(
        fit_regression_kriging(base, variogram_kind(method), opts.drift, opts.variogram));
    return out;
  }

  out.features_ = opts.features;
  const Matrix raw = feature_matrix(base, opts.features);
  out.scaler_ = FeatureScaler::fit(raw);
  const Matrix x = out.scaler_.transform(raw);
  const Vector y = cover_vector(base);
  const BaseInit init = default_base_init(x, y);
  GpFitConfig fit_cfg = opts.gp_fit;
  fit_cfg.seed = derive_seed(seed, 1);

  if (method != Method::gp_comb) {
    const BaseKind kind = base_kind(method);
    const double second = kind == BaseKind::rbf ? init.lengthscale : init.offset;
    out.gp_ = std::make_shared<const GPModel>(fit_gp(KernelExpr::base(kind, init.variance, second), x, y, fit_cfg));
    return out;
  }

  SearchConfig search = opts.search;
  search.fit.seed = derive_seed(seed, 2);
  const Index n = x.rows();
  Matrix xs = x;
  Vector ys = y;
  if (opts.search_max_points > 0 && static_cast<std::size_t>(n) > opts.search_max_points) {
    const auto m = static_cast<Index>(opts.search_max_points);
    xs.resize(m, x.cols());
    ys.resize(m);
    for (Index i = 0; i < m; ++i) {
      const Index src = i * n / m;
      xs.row(i) = x.row(src);
      ys(i) = y(src);
    }
  }
  auto result = std::make_shared<SearchResult>(search_kernel(xs, ys, search));
  GPModel full = fit_gp(result->kernel(), x, y, fit_cfg);
  out.gp_ = std::make_shared<const GPModel>(std::move(full));
  out.search_ = std::move(result);
  return out;
}

std::vector<InterpolatedValue> Interpolator::predict(const std::vector<GeoSample>& sites) const {
  std::vector<InterpolatedValue> out;
  out.reserve(sites.size());
  if (sites.empty()) return out;
  if (gp_) {
    Matrix raw(static_cast<Index>(sites.size()), static_cast<Index>(feature_names(features_).size()));
    for (std::size_t i = 0; i < sites.size(); ++i) raw.row(static_cast<Index>(i)) = feature_row(sites[i], features_);
    for (const auto& p : gp_->predict(scaler_.transform(raw))) out.push_back({p.mean, p.variance});
    return out;
  }
  for (const auto& s : sites) {
    const KrigingPrediction p = kriging_->model.predict_point({s.longitude, s.latitude}, &s);
    out.push_back({p.estimate, p.variance});
  }
  return out;
}

nlohmann::ordered_json Interpolator::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = to_string(method_);
  if (gp_) {
    j["features"] = feature_names(features_);
    j["gp"] = gp_->to_json();
    if (search_) {
      j["search_bic"] = search_->score.bic;
      j["search_trace"] = search_->trace_json();
    }
  } else {
    j["kriging"] = kriging_->model.to_json();
    j["variogram_fit_error"] = kriging_->fit.error;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Candidates

std::vector<CandidatePoint> sample_candidates(const RegionMask& mask, std::size_t n_points, int year_min,
                                              int year_max, std::uint64_t seed) {
  if (year_min > year_max) throw ConfigError("candidates: year_min > year_max");
  if (mask.empty()) throw ConfigError("candidates: mask has no rings");
  std::vector<CandidatePoint> out;
  if (n_points == 0) return out;
  std::mt19937_64 rng(derive_seed(seed, 0xD3));
  std::array<int, 12> months{};
  std::iota(months.begin(), months.end(), 1);
  std::shuffle(months.begin(), months.end(), rng);
  std::uniform_int_distribution<int> year_dist(year_min, year_max);
  out.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const LonLat p = sample_point(mask, rng);
    CandidatePoint c;
    c.lon = p.lon;
    c.lat = p.lat;
    c.month = months[i % 12];
    c.year = year_dist(rng);
    out.push_back(c);
  }
  return out;
}

void AugmentationPlan::validate() const {
  if (year_min > year_max) throw ConfigError("plan: year_min > year_max");
  if (n_points > 2000) throw ConfigError("plan: at most 2000 augmented points are supported");
  if (n_points > 0 && mask.empty()) throw ConfigError("plan: mask has no rings");
}

AugmentResult augment_with(const Dataset& base, const Interpolator& interp,
                           const std::vector<CandidatePoint>& completed, bool clamp, bool sample,
                           std::uint64_t sample_seed) {
  std::vector<GeoSample> sites;
  sites.reserve(completed.size());
  for (const auto& c : completed) sites.push_back(c.to_sample());
  const auto preds = interp.predict(sites);
  std::mt19937_64 rng(derive_seed(sample_seed, 0xE4));
  std::normal_distribution<double> normal(0.0, 1.0);
  AugmentResult r;
  r.variances.reserve(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    double v = preds[i].mean;
    if (sample) v += std::sqrt(std::max(0.0, preds[i].variance)) * normal(rng);
    if (!std::isfinite(v)) throw NumericError("augment: non-finite prediction");
    if (clamp) v = std::clamp(v, 0.0, 100.0);
    sites[i].cover = v;
    r.variances.push_back(preds[i].variance);
  }
  r.dataset = base.appended(sites, Provenance::augmented);
  r.model = interp.to_json();
  return r;
}

AugmentResult augment(const Dataset& base, const AugmentationPlan& plan) {
  plan.validate();
  if (base.empty()) throw DataError("augment: empty base dataset");
  if (plan.n_points == 0) return {base, {}, nullptr};
  const auto candidates = sample_candidates(plan.mask, plan.n_points, plan.year_min, plan.year_max, plan.seed);
  const auto provider = make_provider(plan.provider);
  const auto completed = fetch_all(candidates, *provider, plan.provider.max_in_flight);
  const Interpolator interp = Interpolator::fit(base, plan.method, plan.interpolator, plan.seed);
  return augment_with(base, interp, completed, plan.clamp, plan.sample, plan.seed);
}

}  // namespace geoaug
