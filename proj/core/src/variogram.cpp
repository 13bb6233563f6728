#include "geoaug/variogram.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "geoaug/errors.hpp"
#include "text_util.hpp"

namespace geoaug {

const char* to_string(VariogramKind k) noexcept {
  switch (k) {
    case VariogramKind::linear: return "linear";
    case VariogramKind::exponential: return "exponential";
    case VariogramKind::gaussian: return "gaussian";
    case VariogramKind::spherical: return "spherical";
  }
  return "?";
}

VariogramKind parse_variogram_kind(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "linear" || s == "lin") return VariogramKind::linear;
  if (s == "exponential" || s == "exp") return VariogramKind::exponential;
  if (s == "gaussian" || s == "gau") return VariogramKind::gaussian;
  if (s == "spherical" || s == "sphe" || s == "sph") return VariogramKind::spherical;
  throw ConfigError("unknown variogram model '" + name + "'");
}

VariogramParams VariogramParams::linear(double nugget, double slope) {
  VariogramParams p;
  p.kind = VariogramKind::linear;
  p.nugget = nugget;
  p.slope = slope;
  p.partial_sill = 0.0;
  p.range = 0.0;
  p.validate();
  return p;
}

VariogramParams VariogramParams::bounded(VariogramKind kind, double nugget, double partial_sill, double range) {
  if (kind == VariogramKind::linear) throw ConfigError("linear variogram has no sill or range");
  VariogramParams p;
  p.kind = kind;
  p.nugget = nugget;
  p.partial_sill = partial_sill;
  p.range = range;
  p.validate();
  return p;
}

double VariogramParams::sill() const {
  if (!has_sill()) throw NumericError("linear variogram has no finite sill");
  return nugget + partial_sill;
}

void VariogramParams::validate() const {
  if (!(nugget >= 0.0) || !std::isfinite(nugget)) throw ConfigError("variogram nugget must be >= 0");
  if (kind == VariogramKind::linear) {
    if (!(slope >= 0.0) || !std::isfinite(slope)) throw ConfigError("variogram slope must be >= 0");
    return;
  }
  if (!(partial_sill >= 0.0) || !std::isfinite(partial_sill)) {
    throw ConfigError("variogram partial sill must be >= 0");
  }
  if (!(range > 0.0) || !std::isfinite(range)) throw ConfigError("variogram range must be > 0");
}

nlohmann::ordered_json VariogramParams::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind);
  j["nugget"] = nugget;
  if (kind == VariogramKind::linear) {
    j["slope"] = slope;
  } else {
    j["sill_partial"] = partial_sill;
    j["range"] = range;
  }
  return j;
}

VariogramParams VariogramParams::from_json(const nlohmann::json& j) {
  try {
    const VariogramKind kind = parse_variogram_kind(j.at("kind").get<std::string>());
    if (kind == VariogramKind::linear) return linear(j.at("nugget").get<double>(), j.at("slope").get<double>());
    return bounded(kind, j.at("nugget").get<double>(), j.at("sill_partial").get<double>(),
                   j.at("range").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("variogram json: ") + e.what());
  }
}

double model_eval(const VariogramParams& p, double h) {
  if (h < 0.0 || std::isnan(h)) throw NumericError("variogram: negative lag distance");
  if (h == 0.0) return 0.0;
  const double c0 = p.nugget;
  const double c = p.partial_sill;
  const double a = p.range;
  switch (p.kind) {
    case VariogramKind::linear: return c0 + p.slope * h;
    case VariogramKind::exponential: return c0 + c * (1.0 - std::exp(-h / a));
    case VariogramKind::gaussian: return c0 + c * (1.0 - std::exp(-(h * h) / (a * a)));
    case VariogramKind::spherical: {
      if (h > a) return c0 + c;
      const double r = h / a;
      return c0 + c * (1.5 * r - 0.5 * r * r * r);
    }
  }
  return 0.0;
}

double cov_from_variogram(const VariogramParams& p, double h) {
  if (!p.has_sill()) {
    throw NumericError("linear variogram has no finite sill; use the variogram form of the kriging system");
  }
  return p.sill() - model_eval(p, h);
}

std::string EmpiricalVariogram::to_csv() const {
  std::ostringstream out;
  out << "h,gamma\n";
  for (const auto& b : bins) out << format_double(b.h_center) << ',' << format_double(b.gamma) << '\n';
  return out.str();
}

EmpiricalVariogram empirical_semivariogram(std::span<const LonLat> points, std::span<const double> values,
                                           std::size_t n_bins, std::optional<double> max_lag) {
  if (points.size() != values.size()) throw DataError("variogram: points and values differ in length");
  if (points.size() < 2) throw DataError("variogram: need at least 2 points");
  if (n_bins < 1) throw ConfigError("variogram: n_bins must be >= 1");

  double lag = 0.0;
  if (max_lag) {
    lag = *max_lag;
  } else {
    double dmax = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) dmax = std::max(dmax, distance(points[i], points[j]));
    }
    lag = 0.5 * dmax;
  }
  if (!(lag > 0.0)) throw ConfigError("variogram: max_lag must be > 0");

  const double width = lag / static_cast<double>(n_bins);
  std::vector<double> sums(n_bins, 0.0);
  std::vector<std::size_t> counts(n_bins, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = distance(points[i], points[j]);
      if (d > lag) continue;
      auto b = static_cast<std::size_t>(d / width);
      if (b >= n_bins) b = n_bins - 1;
      const double diff = values[i] - values[j];
      sums[b] += diff * diff;
      ++counts[b];
    }
  }
  EmpiricalVariogram ev;
  ev.max_lag = lag;
  ev.n_bins = n_bins;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (counts[b] == 0) continue;
    ev.bins.push_back({(static_cast<double>(b) + 0.5) * width, sums[b] / (2.0 * static_cast<double>(counts[b])),
                       counts[b]});
  }
  if (ev.bins.empty()) throw DataError("variogram: all pairs lie beyond max_lag");
  return ev;
}

VariogramGrid VariogramGrid::defaults(const EmpiricalVariogram& ev, double var_y) {
  if (ev.bins.empty()) throw DataError("variogram grid: empty variogram");
  const double v = var_y > 0.0 ? var_y : 1.0;
  VariogramGrid g;
  for (double f : {0.0, 0.05, 0.1, 0.2}) g.nuggets.push_back(f * v);
  for (double f : {0.5, 0.8, 1.0, 1.2}) g.partial_sills.push_back(f * v);
  double lo = ev.bins.front().h_center;
  const double hi = ev.max_lag;
  if (!(lo > 0.0) || lo >= hi) lo = hi / 10.0;
  constexpr int kRanges = 10;
  for (int i = 0; i < kRanges; ++i) {
    const double t = static_cast<double>(i) / (kRanges - 1);
    g.ranges.push_back(lo * std::pow(hi / lo, t));
  }
  for (double a : g.ranges) g.slopes.push_back(v / a);
  return g;
}

VariogramFit fit_variogram(const EmpiricalVariogram& ev, VariogramKind kind, const VariogramGrid& grid) {
  if (ev.bins.size() < 3) throw DataError("variogram fit: need at least 3 lag bins");
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto nuggets = sorted(grid.nuggets);
  const bool is_linear = kind == VariogramKind::linear;
  const auto seconds = sorted(is_linear ? grid.slopes : grid.ranges);
  const auto sills = is_linear ? std::vector<double>{0.0} : sorted(grid.partial_sills);
  if (nuggets.empty() || seconds.empty() || sills.empty()) throw ConfigError("variogram fit: empty grid");

  std::optional<VariogramFit> best;
  for (double c0 : nuggets) {
    for (double second : seconds) {
      for (double c : sills) {
        const VariogramParams p = is_linear ? VariogramParams::linear(c0, second)
                                            : VariogramParams::bounded(kind, c0, c, second);
        double err = 0.0;
        for (const auto& b : ev.bins) {
          const double r = b.gamma - model_eval(p, b.h_center);
          err += static_cast<double>(b.pair_count) * r * r;
        }
        if (!best || err < best->error) best = VariogramFit{p, err};
      }
    }
  }
  return *best;
}

}  // namespace geoaug
