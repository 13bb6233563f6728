#include "geoaug/aux_provider.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <thread>

#include <httplib.h>

#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

void check_aux(const AuxValues& a, const std::string& source) {
  if (!std::isfinite(a.altitude) || !std::isfinite(a.avg_temperature) || !std::isfinite(a.precipitation) ||
      !std::isfinite(a.luminance)) {
    throw ProviderError(source + ": non-finite auxiliary value");
  }
}

const char* kind_name(AuxProviderSpec::Kind k) {
  switch (k) {
    case AuxProviderSpec::Kind::grid_file: return "grid_file";
    case AuxProviderSpec::Kind::http: return "http";
    case AuxProviderSpec::Kind::synthetic: return "synthetic";
  }
  return "?";
}

}  // namespace

GeoSample CandidatePoint::to_sample(double cover) const {
  if (!aux) throw ProviderError("candidate has no auxiliaries");
  GeoSample s;
  s.longitude = lon;
  s.latitude = lat;
  s.altitude = aux->altitude;
  s.avg_temperature = aux->avg_temperature;
  s.precipitation = aux->precipitation;
  s.month = month;
  s.year = year;
  s.luminance = aux->luminance;
  s.cover = cover;
  return s;
}

// ---------------------------------------------------------------------------
// Spec

AuxProviderSpec AuxProviderSpec::synthetic(std::uint64_t seed) {
  AuxProviderSpec s;
  s.kind = Kind::synthetic;
  s.seed = seed;
  return s;
}

AuxProviderSpec AuxProviderSpec::grid_file(std::filesystem::path path) {
  AuxProviderSpec s;
  s.kind = Kind::grid_file;
  s.path = std::move(path);
  return s;
}

AuxProviderSpec AuxProviderSpec::http(std::string endpoint) {
  AuxProviderSpec s;
  s.kind = Kind::http;
  s.endpoint = std::move(endpoint);
  return s;
}

nlohmann::ordered_json AuxProviderSpec::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(kind);
  switch (kind) {
    case Kind::grid_file: j["path"] = path.generic_string(); break;
    case Kind::http:
      j["endpoint"] = endpoint;
      j["timeout_s"] = timeout_s;
      j["retries"] = retries;
      j["backoff_s"] = backoff_s;
      j["max_in_flight"] = max_in_flight;
      break;
    case Kind::synthetic: j["seed"] = seed; break;
  }
  return j;
}

AuxProviderSpec AuxProviderSpec::from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    AuxProviderSpec s;
    if (kind == "grid_file") {
      s = grid_file(j.at("path").get<std::string>());
    } else if (kind == "http") {
      s = http(j.at("endpoint").get<std::string>());
      s.timeout_s = j.value("timeout_s", s.timeout_s);
      s.retries = j.value("retries", s.retries);
      s.backoff_s = j.value("backoff_s", s.backoff_s);
      s.max_in_flight = j.value("max_in_flight", s.max_in_flight);
      if (!(s.timeout_s > 0.0) || s.retries < 0 || s.backoff_s < 0.0 || s.max_in_flight < 1) {
        throw ConfigError("provider: invalid http settings");
      }
    } else if (kind == "synthetic") {
      s = synthetic(j.value("seed", std::uint64_t{0}));
    } else {
      throw ConfigError("provider: unknown kind '" + kind + "'");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("provider spec: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Grid

const std::vector<std::string>& AuxGrid::layer_names() {
  static const std::vector<std::string> names{"altitude", "avg_temperature", "precipitation", "luminance"};
  return names;
}

void AuxGrid::validate() const {
  if (nx < 2 || ny < 2) throw ConfigError("aux grid: dims must be at least 2x2");
  if (!(cell_lon > 0.0) || !(cell_lat > 0.0)) throw ConfigError("aux grid: cell size must be positive");
  for (const auto& name : layer_names()) {
    const auto it = layers.find(name);
    if (it == layers.end()) throw ConfigError("aux grid: missing layer '" + name + "'");
    for (const auto& month : it->second) {
      if (month.size() != nx * ny) throw ConfigError("aux grid: layer '" + name + "' has wrong size");
    }
  }
}

double AuxGrid::sample(const std::string& layer, int month, double lon, double lat) const {
  if (month < 1 || month > 12) throw ProviderError("aux grid: month out of range");
  const auto it = layers.find(layer);
  if (it == layers.end()) throw ProviderError("aux grid: no layer '" + layer + "'");
  const double fx = (lon - origin_lon) / cell_lon;
  const double fy = (lat - origin_lat) / cell_lat;
  const double max_x = static_cast<double>(nx - 1);
  const double max_y = static_cast<double>(ny - 1);
  constexpr double kEdge = 1e-9;
  if (!(fx >= -kEdge && fx <= max_x + kEdge && fy >= -kEdge && fy <= max_y + kEdge)) {
    throw ProviderError("aux grid: point (" + std::to_string(lon) + ", " + std::to_string(lat) +
                        ") outside grid coverage");
  }
  const double cx = std::clamp(fx, 0.0, max_x);
  const double cy = std::clamp(fy, 0.0, max_y);
  const auto i0 = static_cast<std::size_t>(std::min(std::floor(cx), max_x - 1.0));
  const auto j0 = static_cast<std::size_t>(std::min(std::floor(cy), max_y - 1.0));
  const double tx = cx - static_cast<double>(i0);
  const double ty = cy - static_cast<double>(j0);
  const auto& v = it->second[static_cast<std::size_t>(month - 1)];
  auto at = [&](std::size_t i, std::size_t j) { return v[j * nx + i]; };
  return (1.0 - tx) * (1.0 - ty) * at(i0, j0) + tx * (1.0 - ty) * at(i0 + 1, j0) + (1.0 - tx) * ty * at(i0, j0 + 1) +
         tx * ty * at(i0 + 1, j0 + 1);
}

AuxValues AuxGrid::sample(int month, double lon, double lat) const {
  return {sample("altitude", month, lon, lat), sample("avg_temperature", month, lon, lat),
          sample("precipitation", month, lon, lat), sample("luminance", month, lon, lat)};
}

nlohmann::ordered_json AuxGrid::to_json() const {
  nlohmann::ordered_json j;
  j["origin"] = {origin_lon, origin_lat};
  j["cell_size"] = {cell_lon, cell_lat};
  j["dims"] = {nx, ny};
  nlohmann::ordered_json l;
  for (const auto& name : layer_names()) {
    const auto it = layers.find(name);
    if (it == layers.end()) continue;
    nlohmann::ordered_json months = nlohmann::ordered_json::array();
    for (const auto& m : it->second) months.push_back(m);
    l[name] = std::move(months);
  }
  j["layers"] = std::move(l);
  return j;
}

AuxGrid AuxGrid::from_json(const nlohmann::json& j) {
  AuxGrid g;
  try {
    const auto origin = j.at("origin").get<std::vector<double>>();
    const auto cell = j.at("cell_size").get<std::vector<double>>();
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    if (origin.size() != 2 || cell.size() != 2 || dims.size() != 2) {
      throw ConfigError("aux grid: origin, cell_size and dims must have two entries");
    }
    g.origin_lon = origin[0];
    g.origin_lat = origin[1];
    g.cell_lon = cell[0];
    g.cell_lat = cell[1];
    g.nx = dims[0];
    g.ny = dims[1];
    for (const auto& name : layer_names()) {
      const auto& months = j.at("layers").at(name);
      if (!months.is_array() || months.size() != 12) {
        throw ConfigError("aux grid: layer '" + name + "' needs 12 monthly arrays");
      }
      std::array<std::vector<double>, 12> arr;
      for (std::size_t m = 0; m < 12; ++m) arr[m] = months[m].get<std::vector<double>>();
      g.layers[name] = std::move(arr);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("aux grid: ") + e.what());
  }
  g.validate();
  return g;
}

AuxGrid AuxGrid::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProviderError("aux grid: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError("aux grid: " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

AuxGrid AuxGrid::from_field(const AuxField& field, const BoundingBox& box, std::size_t nx, std::size_t ny) {
  if (nx < 2 || ny < 2) throw ConfigError("aux grid: dims must be at least 2x2");
  AuxGrid g;
  g.origin_lon = box.lon_min;
  g.origin_lat = box.lat_min;
  g.cell_lon = box.width() / static_cast<double>(nx - 1);
  g.cell_lat = box.height() / static_cast<double>(ny - 1);
  g.nx = nx;
  g.ny = ny;
  for (const auto& name : layer_names()) {
    for (auto& m : g.layers[name]) m.assign(nx * ny, 0.0);
  }
  for (int month = 1; month <= 12; ++month) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const AuxValues a = field.at(g.origin_lon + static_cast<double>(i) * g.cell_lon,
                                     g.origin_lat + static_cast<double>(j) * g.cell_lat, month);
        const std::size_t k = j * nx + i;
        const auto m = static_cast<std::size_t>(month - 1);
        g.layers["altitude"][m][k] = a.altitude;
        g.layers["avg_temperature"][m][k] = a.avg_temperature;
        g.layers["precipitation"][m][k] = a.precipitation;
        g.layers["luminance"][m][k] = a.luminance;
      }
    }
  }
  return g;
}

GridAuxProvider::GridAuxProvider(AuxGrid grid) : grid_(std::move(grid)) { grid_.validate(); }

AuxValues GridAuxProvider::fetch(const CandidatePoint& c) const {
  const AuxValues a = grid_.sample(c.month, c.lon, c.lat);
  check_aux(a, "aux grid");
  return a;
}

// ---------------------------------------------------------------------------
// HTTP

HttpAuxProvider::HttpAuxProvider(AuxProviderSpec spec) : spec_(std::move(spec)) {
  std::string rest = spec_.endpoint;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) != 0) throw ConfigError("http provider: endpoint must start with http://");
  rest = rest.substr(scheme.size());
  const auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  path_ = slash == std::string::npos ? "" : rest.substr(slash);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  if (path_.size() < 4 || path_.compare(path_.size() - 4, 4, "/aux") != 0) path_ += "/aux";
  const auto colon = authority.rfind(':');
  if (colon != std::string::npos) {
    try {
      port_ = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("http provider: bad port in '" + spec_.endpoint + "'");
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw ConfigError("http provider: missing host in '" + spec_.endpoint + "'");
  host_ = authority;
}

AuxValues HttpAuxProvider::fetch(const CandidatePoint& c) const {
  nlohmann::ordered_json req;
  req["lon"] = c.lon;
  req["lat"] = c.lat;
  req["month"] = c.month;
  req["year"] = c.year;
  const std::string body = req.dump();

  const int attempts = 1 + std::max(0, spec_.retries);
  const auto timeout = std::chrono::duration<double>(spec_.timeout_s);
  std::string last_error;
  double delay = spec_.backoff_s;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(host_, port_);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    const auto res = client.Post(path_, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
    } else {
      try {
        const auto j = nlohmann::json::parse(res->body);
        AuxValues a{j.at("altitude").get<double>(), j.at("avg_temperature").get<double>(),
                    j.at("precipitation").get<double>(), j.at("luminance").get<double>()};
        check_aux(a, "http provider");
        return a;
      } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("http provider: malformed response: ") + e.what(), attempt);
      }
    }
    if (attempt < attempts && delay > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      delay *= 2.0;
    }
  }
  throw ProviderError("http provider: request to " + spec_.endpoint + " failed after " + std::to_string(attempts) +
                          " attempts (" + last_error + ")",
                      attempts);
}

// ---------------------------------------------------------------------------

std::unique_ptr<AuxProvider> make_provider(const AuxProviderSpec& spec) {
  switch (spec.kind) {
    case AuxProviderSpec::Kind::grid_file: return std::make_unique<GridAuxProvider>(AuxGrid::load(spec.path));
    case AuxProviderSpec::Kind::http: return std::make_unique<HttpAuxProvider>(spec);
    case AuxProviderSpec::Kind::synthetic: return std::make_unique<SyntheticAuxProvider>(spec.seed);
  }
  throw ConfigError("provider: unknown kind");
}

CandidatePoint fetch_auxiliaries(const CandidatePoint& c, const AuxProvider& provider) {
  CandidatePoint out = c;
  out.aux = provider.fetch(c);
  return out;
}

CandidatePoint fetch_auxiliaries(const CandidatePoint& c, const AuxProviderSpec& spec) {
  return fetch_auxiliaries(c, *make_provider(spec));
}

std::vector<CandidatePoint> fetch_all(const std::vector<CandidatePoint>& candidates, const AuxProvider& provider,
                                      unsigned max_in_flight) {
  std::vector<CandidatePoint> out(candidates.size());
  if (!provider.concurrent() || max_in_flight <= 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = fetch_auxiliaries(candidates[i], provider);
    return out;
  }
  for (std::size_t start = 0; start < candidates.size(); start += max_in_flight) {
    const std::size_t end = std::min(candidates.size(), start + max_in_flight);
    std::vector<std::future<CandidatePoint>> batch;
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] { return fetch_auxiliaries(candidates[i], provider); }));
    }
    std::exception_ptr failure;
    for (std::size_t i = start; i < end; ++i) {
      try {
        out[i] = batch[i - start].get();
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return out;
}

}  // namespace geoaug
