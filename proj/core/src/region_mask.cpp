#include "geoaug/region_mask.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "geoaug/errors.hpp"

namespace geoaug {

double distance(const LonLat& a, const LonLat& b) {
  return std::hypot(a.lon - b.lon, a.lat - b.lat);
}

namespace {

Ring normalize_ring(Ring ring, const std::string& what) {
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  for (const auto& v : ring) {
    if (!std::isfinite(v.lon) || !std::isfinite(v.lat)) {
      throw ConfigError(what + ": non-finite vertex");
    }
  }
  if (ring.size() < 3) throw ConfigError(what + ": ring needs at least 3 vertices");
  return ring;
}

Ring parse_ring(const nlohmann::ordered_json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": ring must be an array of [lon,lat]");
  Ring ring;
  for (const auto& v : j) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError(what + ": vertex must be [lon,lat]");
    }
    ring.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  return ring;
}

bool is_vertex_list(const nlohmann::ordered_json& j) {
  return j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_number();
}

double cross(const LonLat& o, const LonLat& a, const LonLat& b) {
  return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
}

bool segments_cross_properly(const LonLat& a, const LonLat& b, const LonLat& c, const LonLat& d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool strictly_inside(const Ring& ring, const LonLat& p) {
  return ring_contains(ring, p) && !on_ring_boundary(ring, p, 1e-12);
}

void check_disjoint(const Zone& a, const Zone& b) {
  for (const auto& v : a.ring) {
    if (strictly_inside(b.ring, v)) {
      throw ConfigError("zones '" + a.name + "' and '" + b.name + "' overlap");
    }
  }
  for (const auto& v : b.ring) {
    if (strictly_inside(a.ring, v)) {
      throw ConfigError("zones '" + a.name + "' and '" + b.name + "' overlap");
    }
  }
  for (std::size_t i = 0; i < a.ring.size(); ++i) {
    const auto& p = a.ring[i];
    const auto& q = a.ring[(i + 1) % a.ring.size()];
    for (std::size_t k = 0; k < b.ring.size(); ++k) {
      if (segments_cross_properly(p, q, b.ring[k], b.ring[(k + 1) % b.ring.size()])) {
        throw ConfigError("zones '" + a.name + "' and '" + b.name + "' overlap");
      }
    }
  }
}

}  // namespace

bool ring_contains(const Ring& ring, const LonLat& p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = ring[i];
    const auto& b = ring[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double x = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
      if (p.lon < x) inside = !inside;
    }
  }
  return inside;
}

bool on_ring_boundary(const Ring& ring, const LonLat& p, double tol) {
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = ring[i];
    const auto& b = ring[(i + 1) % n];
    const double len = distance(a, b);
    const double scale = std::max(1.0, len);
    if (std::abs(cross(a, b, p)) > tol * scale * scale) continue;
    if (p.lon < std::min(a.lon, b.lon) - tol || p.lon > std::max(a.lon, b.lon) + tol) continue;
    if (p.lat < std::min(a.lat, b.lat) - tol || p.lat > std::max(a.lat, b.lat) + tol) continue;
    return true;
  }
  return false;
}

RegionMask::RegionMask(std::vector<Ring> rings, std::vector<Zone> zones) {
  for (auto& r : rings) rings_.push_back(normalize_ring(std::move(r), "mask"));
  for (auto& z : zones) {
    if (z.name.empty()) throw ConfigError("zone name must not be empty");
    for (const auto& other : zones_) {
      if (other.name == z.name) throw ConfigError("duplicate zone '" + z.name + "'");
    }
    Zone zone{z.name, normalize_ring(std::move(z.ring), "zone '" + z.name + "'")};
    for (const auto& other : zones_) check_disjoint(other, zone);
    zones_.push_back(std::move(zone));
  }
}

RegionMask RegionMask::from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object() || !j.contains("mask")) throw ConfigError("mask file: missing 'mask'");
  std::vector<Ring> rings;
  const auto& m = j.at("mask");
  if (is_vertex_list(m)) {
    rings.push_back(parse_ring(m, "mask"));
  } else if (m.is_array()) {
    for (const auto& r : m) rings.push_back(parse_ring(r, "mask"));
  } else {
    throw ConfigError("mask file: 'mask' must be a ring or a list of rings");
  }
  if (rings.empty()) throw ConfigError("mask file: empty mask");

  std::vector<Zone> zones;
  if (j.contains("zones")) {
    const auto& zj = j.at("zones");
    if (!zj.is_object()) throw ConfigError("mask file: 'zones' must be an object");
    for (const auto& [name, ring] : zj.items()) {
      zones.push_back({name, parse_ring(ring, "zone '" + name + "'")});
    }
  }
  return RegionMask(std::move(rings), std::move(zones));
}

RegionMask RegionMask::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mask file " + path.string());
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("mask file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::ordered_json RegionMask::to_json() const {
  auto ring_json = [](const Ring& r) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& v : r) a.push_back({v.lon, v.lat});
    return a;
  };
  nlohmann::ordered_json j;
  if (rings_.size() == 1) {
    j["mask"] = ring_json(rings_.front());
  } else {
    j["mask"] = nlohmann::ordered_json::array();
    for (const auto& r : rings_) j["mask"].push_back(ring_json(r));
  }
  if (!zones_.empty()) {
    j["zones"] = nlohmann::ordered_json::object();
    for (const auto& z : zones_) j["zones"][z.name] = ring_json(z.ring);
  }
  return j;
}

bool RegionMask::contains(const LonLat& p) const {
  bool inside = false;
  for (const auto& r : rings_) {
    if (ring_contains(r, p)) inside = !inside;
  }
  return inside;
}

std::optional<std::string> RegionMask::zone_of(const LonLat& p) const {
  for (const auto& z : zones_) {
    if (on_ring_boundary(z.ring, p) || ring_contains(z.ring, p)) return z.name;
  }
  return std::nullopt;
}

BoundingBox RegionMask::bounding_box() const {
  if (rings_.empty()) throw ConfigError("bounding box of an empty mask");
  BoundingBox b{rings_[0][0].lon, rings_[0][0].lon, rings_[0][0].lat, rings_[0][0].lat};
  for (const auto& r : rings_) {
    for (const auto& v : r) {
      b.lon_min = std::min(b.lon_min, v.lon);
      b.lon_max = std::max(b.lon_max, v.lon);
      b.lat_min = std::min(b.lat_min, v.lat);
      b.lat_max = std::max(b.lat_max, v.lat);
    }
  }
  return b;
}

std::optional<std::string> assign_zone(const LonLat& p, const RegionMask& mask) {
  return mask.zone_of(p);
}

LonLat sample_point(const RegionMask& mask, std::mt19937_64& rng, std::size_t max_attempts) {
  if (mask.empty()) throw ConfigError("mask has no rings");
  const BoundingBox box = mask.bounding_box();
  std::uniform_real_distribution<double> ulon(box.lon_min, box.lon_max);
  std::uniform_real_distribution<double> ulat(box.lat_min, box.lat_max);
  for (std::size_t i = 0; i < max_attempts; ++i) {
    const LonLat p{ulon(rng), ulat(rng)};
    if (mask.contains(p)) return p;
  }
  throw ConfigError("rejection sampling: no point inside the mask after " + std::to_string(max_attempts) +
                    " attempts");
}

}  // namespace geoaug
