#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "geoaug/numcore.hpp"

namespace geoaug {

/// Auxiliary covariates attached to a (date, location) pair.
struct AuxValues {
  double altitude = 0.0;         // m
  double avg_temperature = 0.0;  // degC
  double precipitation = 0.0;    // mm
  double luminance = 0.0;

  bool operator==(const AuxValues&) const = default;
};

/// One survey row: location, auxiliaries, date and the cover target (percent).
struct GeoSample {
  double longitude = 0.0;
  double latitude = 0.0;
  double altitude = 0.0;
  double avg_temperature = 0.0;
  double precipitation = 0.0;
  int month = 1;
  int year = 2015;
  double luminance = 0.0;
  double cover = 0.0;

  AuxValues aux() const { return {altitude, avg_temperature, precipitation, luminance}; }
  bool operator==(const GeoSample&) const = default;
};

enum class Provenance : std::uint8_t { observed, augmented };

const char* to_string(Provenance p) noexcept;

/// Validation bounds for coordinates. Other fields have fixed domains
/// (month 1-12, cover 0-100, everything finite).
struct Bounds {
  double lon_min = 55.23;
  double lon_max = 55.83;
  double lat_min = -21.40;
  double lat_max = -20.85;

  /// Disables the coordinate range checks.
  static Bounds unbounded();
};

/// Throws DataError describing the first violated invariant.
void validate(const GeoSample& s, const Bounds& bounds = {});

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<GeoSample> samples, std::vector<Provenance> provenance);

  static Dataset observed(std::vector<GeoSample> samples);

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const std::vector<GeoSample>& samples() const noexcept { return samples_; }
  const std::vector<Provenance>& provenance() const noexcept { return provenance_; }
  const GeoSample& operator[](std::size_t i) const { return samples_[i]; }

  std::size_t count(Provenance p) const;
  std::vector<double> covers() const;

  Dataset subset(const std::vector<std::size_t>& indices) const;
  /// Copy of this dataset with `extra` appended under the given provenance.
  Dataset appended(const std::vector<GeoSample>& extra, Provenance p) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<GeoSample> samples_;
  std::vector<Provenance> provenance_;
};

/// Column names of the survey CSV, in file order.
const std::vector<std::string>& csv_columns();

/// Reads a survey CSV. Lines starting with '#' are comments. A trailing
/// `provenance` column is accepted (as written by save_csv).
Dataset load_csv(const std::filesystem::path& path, const Bounds& bounds = {});
Dataset read_csv(std::istream& in, const Bounds& bounds = {}, const std::string& source = "<stream>");

struct CsvWriteOptions {
  bool provenance_column = false;
  std::vector<std::string> comments;  // written as leading "# ..." lines
};

void save_csv(const Dataset& d, const std::filesystem::path& path, const CsvWriteOptions& opts = {});
void write_csv(const Dataset& d, std::ostream& out, const CsvWriteOptions& opts = {});

struct TrainTestSplit {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;  // ascending, into the source dataset
  std::vector<std::size_t> test_indices;
};

/// Uniform random partition with |test| = round(test_fraction * n).
TrainTestSplit split_train_test(const Dataset& d, double test_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Feature encoding

struct FeatureOptions {
  bool include_coordinates = true;
  /// Only longitude/latitude (overrides everything else).
  bool coords_only = false;
};

/// Column labels produced by feature_row for the given options.
std::vector<std::string> feature_names(const FeatureOptions& opts = {});

/// lon, lat, altitude, temperature, precipitation, luminance,
/// sin/cos of the month angle, year - 2013.
Vector feature_row(const GeoSample& s, const FeatureOptions& opts = {});
Matrix feature_matrix(const Dataset& d, const FeatureOptions& opts = {});

/// Per-column z-score standardization fitted on training rows.
class FeatureScaler {
 public:
  FeatureScaler() = default;
  static FeatureScaler fit(const Matrix& rows);

  Matrix transform(const Matrix& rows) const;
  Vector transform_row(const Vector& row) const;

  const Vector& mean() const noexcept { return mean_; }
  const Vector& scale() const noexcept { return scale_; }

 private:
  Vector mean_;
  Vector scale_;
};

}  // namespace geoaug
