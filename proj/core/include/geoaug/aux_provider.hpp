#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoaug/geodata.hpp"
#include "geoaug/region_mask.hpp"
#include "geoaug/synthetic.hpp"

namespace geoaug {

/// A new site and date awaiting auxiliaries.
struct CandidatePoint {
  double lon = 0.0;
  double lat = 0.0;
  int month = 1;
  int year = 2015;
  std::optional<AuxValues> aux;

  GeoSample to_sample(double cover = 0.0) const;
};

/// Where auxiliaries come from. Exactly one kind is active.
struct AuxProviderSpec {
  enum class Kind { grid_file, http, synthetic };

  Kind kind = Kind::synthetic;
  std::filesystem::path path;      // grid_file
  std::string endpoint;            // http, e.g. "http://127.0.0.1:8080"
  double timeout_s = 5.0;          // http, per request
  int retries = 3;                 // http, extra attempts after the first
  double backoff_s = 0.1;          // http, doubled after every failure
  unsigned max_in_flight = 4;      // http, concurrent requests
  std::uint64_t seed = 0;          // synthetic

  static AuxProviderSpec synthetic(std::uint64_t seed);
  static AuxProviderSpec grid_file(std::filesystem::path path);
  static AuxProviderSpec http(std::string endpoint);

  nlohmann::ordered_json to_json() const;
  static AuxProviderSpec from_json(const nlohmann::json& j);
};

class AuxProvider {
 public:
  virtual ~AuxProvider() = default;
  virtual AuxValues fetch(const CandidatePoint& c) const = 0;
  /// Whether fetch_all should issue requests concurrently.
  virtual bool concurrent() const noexcept { return false; }
};

/// Monthly raster layers for the four auxiliaries on a regular lon/lat
/// grid. Node (i, j) sits at (origin_lon + i*cell_lon, origin_lat + j*cell_lat);
/// values are stored row-major with j as the row.
struct AuxGrid {
  double origin_lon = 0.0;
  double origin_lat = 0.0;
  double cell_lon = 0.0;
  double cell_lat = 0.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  /// layer name -> 12 monthly arrays of ny * nx values
  std::map<std::string, std::array<std::vector<double>, 12>> layers;

  static const std::vector<std::string>& layer_names();

  /// Bilinear interpolation; throws ProviderError outside the grid.
  double sample(const std::string& layer, int month, double lon, double lat) const;
  AuxValues sample(int month, double lon, double lat) const;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static AuxGrid from_json(const nlohmann::json& j);
  static AuxGrid load(const std::filesystem::path& path);

  /// Rasterizes an AuxField over a box, nodes on the box corners.
  static AuxGrid from_field(const AuxField& field, const BoundingBox& box, std::size_t nx, std::size_t ny);
};

class GridAuxProvider final : public AuxProvider {
 public:
  explicit GridAuxProvider(AuxGrid grid);
  AuxValues fetch(const CandidatePoint& c) const override;

 private:
  AuxGrid grid_;
};

class SyntheticAuxProvider final : public AuxProvider {
 public:
  explicit SyntheticAuxProvider(std::uint64_t seed) : field_(seed) {}
  AuxValues fetch(const CandidatePoint& c) const override { return field_.at(c.lon, c.lat, c.month); }

 private:
  AuxField field_;
};

/// POST {endpoint}/aux with {"lon","lat","month","year"}; expects
/// {"altitude","avg_temperature","precipitation","luminance"}. Transport
/// errors and non-200 replies are retried with exponential backoff; a
/// malformed 200 reply fails immediately.
class HttpAuxProvider final : public AuxProvider {
 public:
  explicit HttpAuxProvider(AuxProviderSpec spec);
  AuxValues fetch(const CandidatePoint& c) const override;
  bool concurrent() const noexcept override { return true; }

 private:
  AuxProviderSpec spec_;
  std::string host_;
  int port_ = 80;
  std::string path_;
};

std::unique_ptr<AuxProvider> make_provider(const AuxProviderSpec& spec);

CandidatePoint fetch_auxiliaries(const CandidatePoint& c, const AuxProvider& provider);
CandidatePoint fetch_auxiliaries(const CandidatePoint& c, const AuxProviderSpec& spec);

/// Completes every candidate or throws; nothing is returned on partial
/// failure. Up to `max_in_flight` requests run at once when the provider
/// allows it. Output order matches input order.
std::vector<CandidatePoint> fetch_all(const std::vector<CandidatePoint>& candidates, const AuxProvider& provider,
                                      unsigned max_in_flight = 1);

}  // namespace geoaug
