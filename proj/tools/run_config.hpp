#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoaug/augment.hpp"
#include "geoaug/evaluate.hpp"
#include "geoaug/regressors.hpp"
#include "geoaug/synthetic.hpp"

namespace geoaug::cli {

/// Everything one invocation needs. Built from the JSON config file, then
/// patched by command-line flags.
struct RunConfig {
  std::filesystem::path data;
  std::filesystem::path mask;
  std::filesystem::path out = ".";
  bool check_bounds = true;

  std::uint64_t seed = 0;
  std::optional<AuxProviderSpec> provider;  // default: synthetic(seed)

  Method method = Method::gp_comb;     // augment
  std::vector<Method> methods;         // evaluate, sweep, density; default all
  std::vector<RegressorSpec> regressors;  // default LR, RR, KNN, MLP
  std::string sweep_regressor = "MLP";
  std::size_t n_added = 200;
  std::vector<std::size_t> sweep_grid = default_sweep_grid();
  std::size_t repetitions = 10;
  std::optional<std::vector<std::uint64_t>> seeds;
  double test_fraction = 0.3;
  int year_min = 2015;
  int year_max = 2019;
  bool clamp = true;
  bool coords_only = false;
  bool sample = false;

  SyntheticFieldSpec synth{};
  InterpolatorOptions interpolator{};
  KdeOptions kde{};
  ZoneTestOptions zone_test{};
  unsigned jobs = 0;  // 0: all available cores

  /// Relative paths are resolved against `base_dir`.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  /// Throws ConfigError when the mask (and, if asked, the data file) is
  /// unset or missing, or the output directory cannot be created.
  void require_inputs(bool need_data) const;

  /// Effective configuration; the config hash is taken over this.
  nlohmann::ordered_json to_json() const;
  std::string hash() const;

  AuxProviderSpec provider_spec() const;
  std::vector<std::uint64_t> repetition_seeds() const;
  std::vector<Method> method_list() const;
  std::vector<RegressorSpec> regressor_list() const;
  FeatureOptions features() const;
  unsigned effective_jobs() const;
  ExperimentConfig experiment(const RegionMask& mask) const;
  AugmentationPlan plan(const RegionMask& mask) const;
};

}  // namespace geoaug::cli
