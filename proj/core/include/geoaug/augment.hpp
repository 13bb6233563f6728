#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoaug/aux_provider.hpp"
#include "geoaug/geodata.hpp"
#include "geoaug/gp.hpp"
#include "geoaug/kernel_search.hpp"
#include "geoaug/kriging.hpp"
#include "geoaug/region_mask.hpp"

namespace geoaug {

enum class Method { gp_rbf, gp_lin, gp_quad, gp_comb, cokr_lin, cokr_exp, cokr_gau, cokr_sphe };

/// "GP-RBF", ..., "COKR-SPHE"
const char* to_string(Method m) noexcept;
/// Case-insensitive; accepts "gp-comb", "GP_COMB" and the like.
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();
bool is_gp(Method m) noexcept;

struct InterpolatorOptions {
  /// Inputs of the GP methods (standardized on the base data).
  FeatureOptions features{};
  GpFitConfig gp_fit{};
  /// Structure search for GP-COMB. Candidates are scored on at most
  /// `search_max_points` base samples (evenly strided); the winning
  /// structure is then refitted on everything with `gp_fit`.
  SearchConfig search{{BaseKind::lin, BaseKind::rbf, BaseKind::quad}, 3, GpFitConfig{200, 1e-5, 1, 0}, 1};
  std::size_t search_max_points = 150;
  DriftOptions drift{};
  VariogramFitOptions variogram{};
};

struct InterpolatedValue {
  double mean = 0.0;
  double variance = 0.0;
};

/// A fitted cover interpolator for one method: fit once, predict many.
class Interpolator {
 public:
  static Interpolator fit(const Dataset& base, Method method, const InterpolatorOptions& opts = {},
                          std::uint64_t seed = 0);

  Method method() const noexcept { return method_; }
  /// Sites carry auxiliaries and date; their cover is ignored.
  std::vector<InterpolatedValue> predict(const std::vector<GeoSample>& sites) const;

  /// Fitted hyperparameters; GP-COMB adds the BIC search trace.
  nlohmann::ordered_json to_json() const;

 private:
  Interpolator() = default;

  Method method_ = Method::gp_rbf;
  FeatureOptions features_{};
  FeatureScaler scaler_{};
  std::shared_ptr<const GPModel> gp_;
  std::shared_ptr<const SearchResult> search_;
  std::shared_ptr<const FittedKriging> kriging_;
};

/// Sites uniform in the mask (rejection from the bounding box), months
/// round-robin over a random permutation of 1..12, years uniform in
/// [year_min, year_max]. The permutation is drawn first and each candidate
/// consumes the stream in order, so the first k candidates for n > k equal
/// the candidates for k under the same seed.
std::vector<CandidatePoint> sample_candidates(const RegionMask& mask, std::size_t n_points, int year_min,
                                              int year_max, std::uint64_t seed);

struct AugmentationPlan {
  Method method = Method::gp_rbf;
  std::size_t n_points = 0;
  RegionMask mask;
  AuxProviderSpec provider{};
  int year_min = 2015;
  int year_max = 2019;
  std::uint64_t seed = 0;
  bool clamp = true;
  /// Draw mean + N(0, variance) instead of the mean.
  bool sample = false;
  InterpolatorOptions interpolator{};

  void validate() const;
};

struct AugmentResult {
  Dataset dataset;
  /// Predictive variance per added sample, in order.
  std::vector<double> variances;
  /// Interpolator description; null when nothing was added.
  nlohmann::ordered_json model;
};

/// Builds the augmented rows from an already fitted interpolator and
/// completed candidates.
AugmentResult augment_with(const Dataset& base, const Interpolator& interp,
                           const std::vector<CandidatePoint>& completed, bool clamp, bool sample,
                           std::uint64_t sample_seed);

/// Fits the plan's interpolator on base, samples and completes candidates,
/// and appends the predictions with provenance `augmented`. Provider
/// failures abort the whole call.
AugmentResult augment(const Dataset& base, const AugmentationPlan& plan);

}  // namespace geoaug
