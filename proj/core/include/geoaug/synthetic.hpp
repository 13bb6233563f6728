#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "geoaug/geodata.hpp"
#include "geoaug/kernels.hpp"
#include "geoaug/region_mask.hpp"

namespace geoaug {

/// Smooth deterministic auxiliaries over the island: an altitude cone, a
/// lapse-rate temperature with a warm January, an east-wet seasonal
/// rainfall pattern and a seasonal luminance. The seed shifts the phases
/// of small terrain undulations only.
class AuxField {
 public:
  explicit AuxField(std::uint64_t seed = 0);

  AuxValues at(double lon, double lat, int month) const;

 private:
  double phase_[4];
};

enum class TruthKind { constant, analytic, gp_sample };

const char* to_string(TruthKind k) noexcept;
TruthKind parse_truth_kind(const std::string& name);

/// How to generate a synthetic survey with known ground truth.
///
/// Coordinates are normalized to the mask bounding box, (u, v) in [0,1]^2.
///  - constant:  f = level
///  - analytic:  f = 100 * sigmoid(a0 + a1 u + a2 v)
///  - gp_sample: f = level + g(u, v), g a draw from a zero-mean GP with
///    `kernel`, realized as the noise-free interpolant of a joint sample on
///    an anchor grid.
/// Every kind adds aux_weight * (precipitation - 600) so the truth also
/// depends on the date. Observed cover is clamp(f + N(0, noise_std^2), 0, 100).
struct SyntheticFieldSpec {
  TruthKind truth_kind = TruthKind::gp_sample;
  double level = 30.0;
  double sigmoid_a0 = -1.0;
  double sigmoid_a1 = 4.0;
  double sigmoid_a2 = -2.0;
  // Default field: smooth spatial term plus a precipitation effect, with
  // noise of the same order as the signal.
  KernelExpr kernel = KernelExpr::rbf(10.0, 0.3);
  std::size_t anchors_per_axis = 20;
  double aux_weight = 0.03;
  double noise_std = 3.5;
  std::size_t n_points = 500;
  int year_min = 2015;
  int year_max = 2019;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static SyntheticFieldSpec from_json(const nlohmann::json& j);
};

/// Evaluates the noiseless truth (clamped to [0,100]) anywhere.
class TruthOracle {
 public:
  TruthOracle(const SyntheticFieldSpec& spec, const RegionMask& mask);

  double operator()(double lon, double lat, int month) const;
  double operator()(const GeoSample& s) const { return (*this)(s.longitude, s.latitude, s.month); }

  const SyntheticFieldSpec& spec() const noexcept { return spec_; }
  const AuxField& aux_field() const noexcept { return aux_; }

 private:
  double spatial(double u, double v) const;

  SyntheticFieldSpec spec_;
  BoundingBox box_;
  AuxField aux_;
  Matrix anchors_;
  Vector weights_;
};

struct SyntheticData {
  Dataset dataset;
  TruthOracle truth;
};

/// Sites uniform in the mask, month and year uniform, auxiliaries from
/// AuxField(spec.seed).
SyntheticData generate_synthetic(const SyntheticFieldSpec& spec, const RegionMask& mask);

}  // namespace geoaug
