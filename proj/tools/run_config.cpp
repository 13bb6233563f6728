#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <thread>
#include <set>

#include "geoaug/errors.hpp"
#include "geoaug/report_io.hpp"

namespace geoaug::cli {

namespace fs = std::filesystem;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "data",     "mask",      "out",          "check_bounds",  "seed",         "provider",
      "method",   "methods",   "regressors",   "sweep_regressor", "n_added",    "sweep_grid",
      "repetitions", "seeds",  "test_fraction", "years",        "clamp",        "coords_only",
      "sample",   "synth",     "interpolator", "kde",           "zone_test",    "jobs"};
  return keys;
}

fs::path resolve(const fs::path& p, const fs::path& base_dir) {
  if (p.empty() || p.is_absolute()) return p;
  return (base_dir / p).lexically_normal();
}

void read_interpolator(const nlohmann::json& j, InterpolatorOptions& o) {
  for (const auto& [key, _] : j.items()) {
    static const std::set<std::string> allowed{"restarts",          "max_iters",      "search_depth",
                                               "search_restarts",   "search_max_points", "variogram_bins"};
    if (!allowed.count(key)) throw ConfigError("interpolator: unknown key '" + key + "'");
  }
  o.gp_fit.restarts = j.value("restarts", o.gp_fit.restarts);
  o.gp_fit.max_iters = j.value("max_iters", o.gp_fit.max_iters);
  o.search.max_depth = j.value("search_depth", o.search.max_depth);
  o.search.fit.restarts = j.value("search_restarts", o.search.fit.restarts);
  o.search_max_points = j.value("search_max_points", o.search_max_points);
  o.variogram.n_bins = j.value("variogram_bins", o.variogram.n_bins);
  if (o.search.max_depth < 1) throw ConfigError("interpolator: search_depth must be >= 1");
  if (o.gp_fit.restarts < 0 || o.search.fit.restarts < 0) throw ConfigError("interpolator: restarts must be >= 0");
}

nlohmann::ordered_json interpolator_json(const InterpolatorOptions& o) {
  return {{"restarts", o.gp_fit.restarts},
          {"max_iters", o.gp_fit.max_iters},
          {"search_depth", o.search.max_depth},
          {"search_restarts", o.search.fit.restarts},
          {"search_max_points", o.search_max_points},
          {"variogram_bins", o.variogram.n_bins}};
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known_keys().count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }
  RunConfig c;
  try {
    if (j.contains("data")) c.data = resolve(j.at("data").get<std::string>(), base_dir);
    if (j.contains("mask")) c.mask = resolve(j.at("mask").get<std::string>(), base_dir);
    if (j.contains("out")) c.out = resolve(j.at("out").get<std::string>(), base_dir);
    c.check_bounds = j.value("check_bounds", c.check_bounds);
    c.seed = j.value("seed", c.seed);
    if (j.contains("provider")) {
      AuxProviderSpec p = AuxProviderSpec::from_json(j.at("provider"));
      if (p.kind == AuxProviderSpec::Kind::grid_file) p.path = resolve(p.path, base_dir);
      c.provider = p;
    }
    if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("methods")) {
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("regressors")) {
      for (const auto& r : j.at("regressors")) c.regressors.push_back(RegressorSpec::from_json(r));
    }
    c.sweep_regressor = j.value("sweep_regressor", c.sweep_regressor);
    c.n_added = j.value("n_added", c.n_added);
    if (j.contains("sweep_grid")) c.sweep_grid = j.at("sweep_grid").get<std::vector<std::size_t>>();
    c.repetitions = j.value("repetitions", c.repetitions);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    if (j.contains("years")) {
      const auto y = j.at("years").get<std::vector<int>>();
      if (y.size() != 2) throw ConfigError("config: years must be [min, max]");
      c.year_min = y[0];
      c.year_max = y[1];
    }
    c.clamp = j.value("clamp", c.clamp);
    c.coords_only = j.value("coords_only", c.coords_only);
    c.sample = j.value("sample", c.sample);
    if (j.contains("synth")) c.synth = SyntheticFieldSpec::from_json(j.at("synth"));
    if (j.contains("interpolator")) read_interpolator(j.at("interpolator"), c.interpolator);
    if (j.contains("kde")) {
      const auto& k = j.at("kde");
      c.kde.nx = k.value("nx", c.kde.nx);
      c.kde.ny = k.value("ny", c.kde.ny);
      if (k.contains("bandwidth_lon")) c.kde.bandwidth_lon = k.at("bandwidth_lon").get<double>();
      if (k.contains("bandwidth_lat")) c.kde.bandwidth_lat = k.at("bandwidth_lat").get<double>();
    }
    if (j.contains("zone_test")) {
      const auto& z = j.at("zone_test");
      c.zone_test.permutations = z.value("permutations", c.zone_test.permutations);
      c.zone_test.alpha = z.value("alpha", c.zone_test.alpha);
    }
    c.jobs = j.value("jobs", c.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.repetitions == 0 && !c.seeds) throw ConfigError("config: repetitions must be positive");
  if (c.seeds && c.seeds->empty()) throw ConfigError("config: seeds is empty");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw ConfigError("config: test_fraction must be in (0, 1)");
  if (c.year_min > c.year_max) throw ConfigError("config: years out of order");
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path());
}

void RunConfig::require_inputs(bool need_data) const {
  if (mask.empty()) throw ConfigError("no mask given (set \"mask\" in the config or pass --mask)");
  if (!fs::is_regular_file(mask)) throw ConfigError("mask file not found: " + mask.string());
  if (need_data) {
    if (data.empty()) throw ConfigError("no data file given (set \"data\" in the config or pass --data)");
    if (!fs::is_regular_file(data)) throw ConfigError("data file not found: " + data.string());
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ConfigError("cannot create output directory " + out.string());
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["data"] = data.string();
  j["mask"] = mask.string();
  j["out"] = out.string();
  j["check_bounds"] = check_bounds;
  j["seed"] = seed;
  j["provider"] = provider_spec().to_json();
  j["method"] = to_string(method);
  auto& ms = j["methods"] = nlohmann::ordered_json::array();
  for (Method m : method_list()) ms.push_back(to_string(m));
  auto& rs = j["regressors"] = nlohmann::ordered_json::array();
  for (const auto& r : regressor_list()) rs.push_back(r.to_json());
  j["sweep_regressor"] = sweep_regressor;
  j["n_added"] = n_added;
  j["sweep_grid"] = sweep_grid;
  j["seeds"] = repetition_seeds();
  j["test_fraction"] = test_fraction;
  j["years"] = {year_min, year_max};
  j["clamp"] = clamp;
  j["coords_only"] = coords_only;
  j["sample"] = sample;
  SyntheticFieldSpec sp = synth;
  sp.seed = seed;
  j["synth"] = sp.to_json();
  j["interpolator"] = interpolator_json(interpolator);
  nlohmann::ordered_json kde_j{{"nx", kde.nx}, {"ny", kde.ny}};
  if (kde.bandwidth_lon) kde_j["bandwidth_lon"] = *kde.bandwidth_lon;
  if (kde.bandwidth_lat) kde_j["bandwidth_lat"] = *kde.bandwidth_lat;
  j["kde"] = kde_j;
  j["zone_test"] = {{"permutations", zone_test.permutations}, {"alpha", zone_test.alpha}};
  j["jobs"] = jobs;
  return j;
}

std::string RunConfig::hash() const {
  nlohmann::json j = to_json();
  j.erase("out");
  return config_hash(j);
}

AuxProviderSpec RunConfig::provider_spec() const { return provider.value_or(AuxProviderSpec::synthetic(seed)); }

std::vector<std::uint64_t> RunConfig::repetition_seeds() const {
  if (seeds) return *seeds;
  std::vector<std::uint64_t> s;
  for (std::size_t r = 0; r < repetitions; ++r) s.push_back(seed + r);
  return s;
}

std::vector<Method> RunConfig::method_list() const { return methods.empty() ? all_methods() : methods; }

std::vector<RegressorSpec> RunConfig::regressor_list() const {
  if (!regressors.empty()) return regressors;
  return {RegressorSpec::lr(), RegressorSpec::rr(), RegressorSpec::knn(), RegressorSpec::mlp()};
}

FeatureOptions RunConfig::features() const {
  FeatureOptions f;
  f.coords_only = coords_only;
  return f;
}

unsigned RunConfig::effective_jobs() const {
  return jobs > 0 ? jobs : std::max(1u, std::thread::hardware_concurrency());
}

ExperimentConfig RunConfig::experiment(const RegionMask& m) const {
  ExperimentConfig e;
  e.seeds = repetition_seeds();
  e.test_fraction = test_fraction;
  e.features = features();
  e.mask = m;
  e.provider = provider_spec();
  e.year_min = year_min;
  e.year_max = year_max;
  e.clamp = clamp;
  e.sample = sample;
  e.interpolator = interpolator;
  e.interpolator.features = features();
  e.jobs = effective_jobs();
  return e;
}

AugmentationPlan RunConfig::plan(const RegionMask& m) const {
  AugmentationPlan p;
  p.method = method;
  p.n_points = n_added;
  p.mask = m;
  p.provider = provider_spec();
  p.year_min = year_min;
  p.year_max = year_max;
  p.seed = seed;
  p.clamp = clamp;
  p.sample = sample;
  p.interpolator = interpolator;
  p.interpolator.features = features();
  p.interpolator.search.jobs = effective_jobs();
  return p;
}

}  // namespace geoaug::cli
