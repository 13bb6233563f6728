#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace geoaug {

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;

  bool operator==(const LonLat&) const = default;
};

double distance(const LonLat& a, const LonLat& b);

/// Implicitly closed polygon ring (first vertex is not repeated).
using Ring = std::vector<LonLat>;

struct Zone {
  std::string name;
  Ring ring;
};

struct BoundingBox {
  double lon_min = 0.0;
  double lon_max = 0.0;
  double lat_min = 0.0;
  double lat_max = 0.0;

  double width() const { return lon_max - lon_min; }
  double height() const { return lat_max - lat_min; }
};

/// Sampling mask plus optional named, mutually disjoint zones.
///
/// Mask membership uses the even-odd rule over all rings together, so an
/// inner ring punches a hole in an outer one. Zone membership counts points
/// on a zone's boundary as inside; the first zone in declaration order wins.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(std::vector<Ring> rings, std::vector<Zone> zones = {});

  static RegionMask from_json(const nlohmann::ordered_json& j);
  static RegionMask load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;

  bool contains(const LonLat& p) const;
  std::optional<std::string> zone_of(const LonLat& p) const;

  const std::vector<Ring>& rings() const noexcept { return rings_; }
  const std::vector<Zone>& zones() const noexcept { return zones_; }
  bool empty() const noexcept { return rings_.empty(); }
  BoundingBox bounding_box() const;

 private:
  std::vector<Ring> rings_;
  std::vector<Zone> zones_;
};

std::optional<std::string> assign_zone(const LonLat& p, const RegionMask& mask);

/// Uniform draw inside the mask by rejection from its bounding box. Throws
/// ConfigError after `max_attempts` misses.
LonLat sample_point(const RegionMask& mask, std::mt19937_64& rng, std::size_t max_attempts = 100000);

/// Strict even-odd interior test for a single ring.
bool ring_contains(const Ring& ring, const LonLat& p);
bool on_ring_boundary(const Ring& ring, const LonLat& p, double tol = 1e-12);

}  // namespace geoaug
