#include "geoaug/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

#include "geoaug/errors.hpp"
#include "geoaug/hash.hpp"

namespace geoaug {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPeakLon = 55.53;
constexpr double kPeakLat = -21.12;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double clamp_cover(double v) { return std::clamp(v, 0.0, 100.0); }

}  // namespace

AuxField::AuxField(std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0xA0));
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (double& p : phase_) p = u(rng);
}

AuxValues AuxField::at(double lon, double lat, int month) const {
  const double dx = (lon - kPeakLon) / 0.30;
  const double dy = (lat - kPeakLat) / 0.27;
  const double r = std::sqrt(dx * dx + dy * dy);
  const double cone = std::max(0.0, 1.0 - r);
  const double ripple = 1.0 + 0.08 * std::sin(9.0 * lon + phase_[0]) * std::cos(11.0 * lat + phase_[1]);
  const double altitude = 20.0 + 930.0 * std::pow(cone, 1.3) * ripple;

  const double season = std::cos(kTwoPi * (month - 1) / 12.0);  // +1 in January
  const double temperature = 26.5 - 0.0065 * altitude + 2.5 * season + 0.3 * std::sin(5.0 * lat + phase_[2]);

  const double east = sigmoid((lon - 55.55) / 0.06);
  const double wet = 1.0 + 0.6 * std::cos(kTwoPi * (month - 2) / 12.0);
  const double precipitation =
      std::max(0.0, (60.0 + 450.0 * east + 0.25 * altitude) * wet * (1.0 + 0.05 * std::sin(7.0 * lon + phase_[3])));

  const double luminance = 1400.0 + 380.0 * season - 0.12 * altitude - 60.0 * east;
  return {altitude, temperature, precipitation, luminance};
}

const char* to_string(TruthKind k) noexcept {
  switch (k) {
    case TruthKind::constant: return "constant";
    case TruthKind::analytic: return "analytic";
    case TruthKind::gp_sample: return "gp_sample";
  }
  return "?";
}

TruthKind parse_truth_kind(const std::string& name) {
  if (name == "constant") return TruthKind::constant;
  if (name == "analytic") return TruthKind::analytic;
  if (name == "gp_sample") return TruthKind::gp_sample;
  throw ConfigError("unknown truth kind '" + name + "'");
}

void SyntheticFieldSpec::validate() const {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("synthetic: noise_std must be >= 0");
  if (n_points < 1) throw ConfigError("synthetic: n_points must be >= 1");
  if (year_min > year_max) throw ConfigError("synthetic: year_min > year_max");
  if (truth_kind == TruthKind::gp_sample && anchors_per_axis < 2) {
    throw ConfigError("synthetic: anchors_per_axis must be >= 2");
  }
  if (!std::isfinite(level) || !std::isfinite(aux_weight)) throw ConfigError("synthetic: non-finite parameter");
}

nlohmann::ordered_json SyntheticFieldSpec::to_json() const {
  nlohmann::ordered_json j;
  j["truth_kind"] = to_string(truth_kind);
  j["level"] = level;
  if (truth_kind == TruthKind::analytic) j["sigmoid"] = {sigmoid_a0, sigmoid_a1, sigmoid_a2};
  if (truth_kind == TruthKind::gp_sample) {
    j["kernel"] = kernel.to_string();
    j["anchors_per_axis"] = anchors_per_axis;
  }
  j["aux_weight"] = aux_weight;
  j["noise_std"] = noise_std;
  j["n_points"] = n_points;
  j["years"] = {year_min, year_max};
  j["seed"] = seed;
  return j;
}

SyntheticFieldSpec SyntheticFieldSpec::from_json(const nlohmann::json& j) {
  SyntheticFieldSpec s;
  try {
    if (j.contains("truth_kind")) s.truth_kind = parse_truth_kind(j.at("truth_kind").get<std::string>());
    s.level = j.value("level", s.level);
    if (j.contains("sigmoid")) {
      const auto a = j.at("sigmoid").get<std::vector<double>>();
      if (a.size() != 3) throw ConfigError("synthetic: sigmoid needs 3 coefficients");
      s.sigmoid_a0 = a[0];
      s.sigmoid_a1 = a[1];
      s.sigmoid_a2 = a[2];
    }
    if (j.contains("kernel")) s.kernel = KernelExpr::parse(j.at("kernel").get<std::string>());
    s.anchors_per_axis = j.value("anchors_per_axis", s.anchors_per_axis);
    s.aux_weight = j.value("aux_weight", s.aux_weight);
    s.noise_std = j.value("noise_std", s.noise_std);
    s.n_points = j.value("n_points", s.n_points);
    if (j.contains("years")) {
      const auto y = j.at("years").get<std::vector<int>>();
      if (y.size() != 2) throw ConfigError("synthetic: years must be [min, max]");
      s.year_min = y[0];
      s.year_max = y[1];
    }
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

TruthOracle::TruthOracle(const SyntheticFieldSpec& spec, const RegionMask& mask)
    : spec_(spec), aux_(spec.seed) {
  spec_.validate();
  if (mask.empty()) throw ConfigError("synthetic: mask has no rings");
  box_ = mask.bounding_box();
  if (!(box_.width() > 0.0) || !(box_.height() > 0.0)) throw ConfigError("synthetic: degenerate mask extent");
  if (spec_.truth_kind != TruthKind::gp_sample) return;

  const std::size_t m = spec_.anchors_per_axis;
  anchors_.resize(static_cast<Index>(m * m), 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto r = static_cast<Index>(i * m + j);
      anchors_(r, 0) = static_cast<double>(i) / static_cast<double>(m - 1);
      anchors_(r, 1) = static_cast<double>(j) / static_cast<double>(m - 1);
    }
  }
  const CholeskyFactor chol = cholesky(gram(spec_.kernel, anchors_));
  std::mt19937_64 rng(derive_seed(spec_.seed, 0xB1));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(anchors_.rows());
  for (Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  // f = L z at the anchors; the interpolant weights are (LL^T)^{-1} f = L^{-T} z.
  weights_ = chol.lower().transpose().triangularView<Eigen::Upper>().solve(z);
}

double TruthOracle::spatial(double u, double v) const {
  switch (spec_.truth_kind) {
    case TruthKind::constant: return spec_.level;
    case TruthKind::analytic: return 100.0 * sigmoid(spec_.sigmoid_a0 + spec_.sigmoid_a1 * u + spec_.sigmoid_a2 * v);
    case TruthKind::gp_sample: {
      const double x[2] = {u, v};
      double g = 0.0;
      for (Index i = 0; i < anchors_.rows(); ++i) {
        const double a[2] = {anchors_(i, 0), anchors_(i, 1)};
        g += eval_kernel(spec_.kernel, x, a) * weights_(i);
      }
      return spec_.level + g;
    }
  }
  return 0.0;
}

double TruthOracle::operator()(double lon, double lat, int month) const {
  const double u = (lon - box_.lon_min) / box_.width();
  const double v = (lat - box_.lat_min) / box_.height();
  double f = spatial(u, v);
  if (spec_.aux_weight != 0.0) f += spec_.aux_weight * (aux_.at(lon, lat, month).precipitation - 600.0);
  return clamp_cover(f);
}

SyntheticData generate_synthetic(const SyntheticFieldSpec& spec, const RegionMask& mask) {
  TruthOracle truth(spec, mask);
  std::mt19937_64 rng(derive_seed(spec.seed, 0xC2));
  std::uniform_int_distribution<int> month_dist(1, 12);
  std::uniform_int_distribution<int> year_dist(spec.year_min, spec.year_max);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t cap = std::max<std::size_t>(100000, 1000 * spec.n_points);

  std::vector<GeoSample> samples;
  samples.reserve(spec.n_points);
  for (std::size_t i = 0; i < spec.n_points; ++i) {
    const LonLat p = sample_point(mask, rng, cap);
    GeoSample s;
    s.longitude = p.lon;
    s.latitude = p.lat;
    s.month = month_dist(rng);
    s.year = year_dist(rng);
    const AuxValues a = truth.aux_field().at(p.lon, p.lat, s.month);
    s.altitude = a.altitude;
    s.avg_temperature = a.avg_temperature;
    s.precipitation = a.precipitation;
    s.luminance = a.luminance;
    const double eps = noise(rng);
    const double f = truth(p.lon, p.lat, s.month);
    s.cover = spec.noise_std > 0.0 ? clamp_cover(f + spec.noise_std * eps) : f;
    samples.push_back(s);
  }
  return {Dataset::observed(std::move(samples)), std::move(truth)};
}

}  // namespace geoaug
