#include "geoaug/geodata.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "geoaug/errors.hpp"
#include "text_util.hpp"

namespace geoaug {

const char* to_string(Provenance p) noexcept {
  return p == Provenance::observed ? "observed" : "augmented";
}

Bounds Bounds::unbounded() {
  const double inf = std::numeric_limits<double>::infinity();
  return Bounds{-inf, inf, -inf, inf};
}

void validate(const GeoSample& s, const Bounds& bounds) {
  const std::array<std::pair<const char*, double>, 7> continuous{{
      {"longitude", s.longitude},
      {"latitude", s.latitude},
      {"altitude", s.altitude},
      {"avg_temperature", s.avg_temperature},
      {"precipitation", s.precipitation},
      {"luminance", s.luminance},
      {"cover", s.cover},
  }};
  for (const auto& [name, v] : continuous) {
    if (!std::isfinite(v)) throw DataError(std::string(name) + " is not finite");
  }
  if (s.month < 1 || s.month > 12) throw DataError("month out of range: " + std::to_string(s.month));
  if (s.cover < 0.0 || s.cover > 100.0) {
    throw DataError("cover out of range [0,100]: " + format_double(s.cover));
  }
  if (s.longitude < bounds.lon_min || s.longitude > bounds.lon_max) {
    throw DataError("longitude out of bounds: " + format_double(s.longitude));
  }
  if (s.latitude < bounds.lat_min || s.latitude > bounds.lat_max) {
    throw DataError("latitude out of bounds: " + format_double(s.latitude));
  }
}

Dataset::Dataset(std::vector<GeoSample> samples, std::vector<Provenance> provenance)
    : samples_(std::move(samples)), provenance_(std::move(provenance)) {
  if (samples_.size() != provenance_.size()) {
    throw DataError("dataset: provenance length does not match sample count");
  }
}

Dataset Dataset::observed(std::vector<GeoSample> samples) {
  std::vector<Provenance> prov(samples.size(), Provenance::observed);
  return Dataset(std::move(samples), std::move(prov));
}

std::size_t Dataset::count(Provenance p) const {
  return static_cast<std::size_t>(std::count(provenance_.begin(), provenance_.end(), p));
}

std::vector<double> Dataset::covers() const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.cover);
  return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<GeoSample> s;
  std::vector<Provenance> p;
  s.reserve(indices.size());
  p.reserve(indices.size());
  for (std::size_t i : indices) {
    s.push_back(samples_.at(i));
    p.push_back(provenance_.at(i));
  }
  return Dataset(std::move(s), std::move(p));
}

Dataset Dataset::appended(const std::vector<GeoSample>& extra, Provenance p) const {
  Dataset out = *this;
  out.samples_.insert(out.samples_.end(), extra.begin(), extra.end());
  out.provenance_.insert(out.provenance_.end(), extra.size(), p);
  return out;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"longitude", "latitude",      "altitude",
                                             "avg_temperature", "precipitation", "month",
                                             "year",      "luminance",     "cover"};
  return cols;
}

namespace {

int parse_int_field(std::string_view text, const char* name) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec == std::errc() && ptr == text.data() + text.size()) return v;
  const double d = parse_double(text, name);
  if (std::floor(d) != d || std::abs(d) > 1e9) {
    throw DataError(std::string(name) + " is not an integer: '" + std::string(text) + "'");
  }
  return static_cast<int>(d);
}

}  // namespace

Dataset read_csv(std::istream& in, const Bounds& bounds, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  bool with_provenance = false;
  std::vector<GeoSample> samples;
  std::vector<Provenance> provenance;

  const auto& cols = csv_columns();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, ',');
    if (!have_header) {
      for (auto& f : fields) f = std::string(trim(f));
      std::vector<std::string> expected = cols;
      if (fields.size() == cols.size() + 1 && fields.back() == "provenance") {
        with_provenance = true;
        expected.push_back("provenance");
      }
      if (fields != expected) {
        for (const auto& c : cols) {
          if (std::find(fields.begin(), fields.end(), c) == fields.end()) {
            throw DataError(source + ":" + std::to_string(line_no) + ": missing column '" + c + "'");
          }
        }
        throw DataError(source + ":" + std::to_string(line_no) +
                        ": header must be exactly '" + join(cols, ",") + "'");
      }
      have_header = true;
      continue;
    }
    const std::size_t want = cols.size() + (with_provenance ? 1 : 0);
    if (fields.size() != want) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(want) +
                      " fields, got " + std::to_string(fields.size()));
    }
    try {
      GeoSample s;
      s.longitude = parse_double(trim(fields[0]), "longitude");
      s.latitude = parse_double(trim(fields[1]), "latitude");
      s.altitude = parse_double(trim(fields[2]), "altitude");
      s.avg_temperature = parse_double(trim(fields[3]), "avg_temperature");
      s.precipitation = parse_double(trim(fields[4]), "precipitation");
      s.month = parse_int_field(trim(fields[5]), "month");
      s.year = parse_int_field(trim(fields[6]), "year");
      s.luminance = parse_double(trim(fields[7]), "luminance");
      s.cover = parse_double(trim(fields[8]), "cover");
      validate(s, bounds);
      Provenance p = Provenance::observed;
      if (with_provenance) {
        const auto tag = trim(fields[9]);
        if (tag == "augmented") {
          p = Provenance::augmented;
        } else if (tag != "observed") {
          throw DataError("unknown provenance '" + std::string(tag) + "'");
        }
      }
      samples.push_back(s);
      provenance.push_back(p);
    } catch (const DataError& e) {
      throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw DataError(source + ": missing header");
  return Dataset(std::move(samples), std::move(provenance));
}

Dataset load_csv(const std::filesystem::path& path, const Bounds& bounds) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in, bounds, path.string());
}

void write_csv(const Dataset& d, std::ostream& out, const CsvWriteOptions& opts) {
  for (const auto& c : opts.comments) out << "# " << c << '\n';
  out << join(csv_columns(), ",");
  if (opts.provenance_column) out << ",provenance";
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& s = d[i];
    out << format_double(s.longitude) << ',' << format_double(s.latitude) << ','
        << format_double(s.altitude) << ',' << format_double(s.avg_temperature) << ','
        << format_double(s.precipitation) << ',' << s.month << ',' << s.year << ','
        << format_double(s.luminance) << ',' << format_double(s.cover);
    if (opts.provenance_column) out << ',' << to_string(d.provenance()[i]);
    out << '\n';
  }
}

void save_csv(const Dataset& d, const std::filesystem::path& path, const CsvWriteOptions& opts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(d, out, opts);
  if (!out) throw DataError("write failed: " + path.string());
}

TrainTestSplit split_train_test(const Dataset& d, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("split: test_fraction must lie in (0,1)");
  }
  const std::size_t n = d.size();
  if (n < 2) throw DataError("split: need at least 2 samples");
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) {
    throw DataError("split: degenerate partition (" + std::to_string(n - n_test) + " train, " +
                    std::to_string(n_test) + " test)");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  TrainTestSplit out;
  out.test_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  std::sort(out.train_indices.begin(), out.train_indices.end());
  out.train = d.subset(out.train_indices);
  out.test = d.subset(out.test_indices);
  return out;
}

std::vector<std::string> feature_names(const FeatureOptions& opts) {
  if (opts.coords_only) return {"longitude", "latitude"};
  std::vector<std::string> names;
  if (opts.include_coordinates) {
    names.push_back("longitude");
    names.push_back("latitude");
  }
  for (const char* n : {"altitude", "avg_temperature", "precipitation", "luminance", "month_sin",
                        "month_cos", "year"}) {
    names.emplace_back(n);
  }
  return names;
}

Vector feature_row(const GeoSample& s, const FeatureOptions& opts) {
  if (opts.coords_only) return Vector{{s.longitude, s.latitude}};
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(s.month) / 12.0;
  Vector row(opts.include_coordinates ? 9 : 7);
  Index k = 0;
  if (opts.include_coordinates) {
    row(k++) = s.longitude;
    row(k++) = s.latitude;
  }
  row(k++) = s.altitude;
  row(k++) = s.avg_temperature;
  row(k++) = s.precipitation;
  row(k++) = s.luminance;
  row(k++) = std::sin(angle);
  row(k++) = std::cos(angle);
  row(k++) = static_cast<double>(s.year - 2013);
  return row;
}

Matrix feature_matrix(const Dataset& d, const FeatureOptions& opts) {
  const auto cols = static_cast<Index>(feature_names(opts).size());
  Matrix X(static_cast<Index>(d.size()), cols);
  for (std::size_t i = 0; i < d.size(); ++i) X.row(static_cast<Index>(i)) = feature_row(d[i], opts);
  return X;
}

FeatureScaler FeatureScaler::fit(const Matrix& rows) {
  if (rows.rows() == 0) throw DataError("feature scaler: no rows");
  FeatureScaler s;
  s.mean_ = rows.colwise().mean();
  s.scale_.resize(rows.cols());
  for (Index j = 0; j < rows.cols(); ++j) {
    const double var = (rows.col(j).array() - s.mean_(j)).square().mean();
    const double sd = std::sqrt(var);
    // constant columns pass through centred
    s.scale_(j) = sd > 1e-12 * std::max(1.0, std::abs(s.mean_(j))) ? sd : 1.0;
  }
  return s;
}

Matrix FeatureScaler::transform(const Matrix& rows) const {
  if (rows.cols() != mean_.size()) throw DataError("feature scaler: column count mismatch");
  return (rows.rowwise() - mean_.transpose()).array().rowwise() / scale_.transpose().array();
}

Vector FeatureScaler::transform_row(const Vector& row) const {
  if (row.size() != mean_.size()) throw DataError("feature scaler: column count mismatch");
  return (row - mean_).cwiseQuotient(scale_);
}

}  // namespace geoaug
