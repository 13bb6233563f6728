#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>

#include "geoaug/augment.hpp"
#include "geoaug/errors.hpp"
#include "geoaug/evaluate.hpp"
#include "geoaug/geodata.hpp"
#include "geoaug/region_mask.hpp"
#include "geoaug/report_io.hpp"
#include "geoaug/synthetic.hpp"
#include "run_config.hpp"

namespace geoaug::cli {

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config;
  std::uint64_t seed = 0;
  std::string method;
  std::size_t n = 0;
  unsigned jobs = 0;
  std::string out;
  std::string data;
  std::string mask;
  bool coords_only = false;
  bool sample = false;

  struct Options {
    CLI::Option* seed = nullptr;
    CLI::Option* method = nullptr;
    CLI::Option* n = nullptr;
    CLI::Option* jobs = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* data = nullptr;
    CLI::Option* mask = nullptr;
  };
  std::map<std::string, Options> per_command;

  void attach(CLI::App* sub) {
    Options o;
    sub->add_option("--config", config, "JSON run configuration");
    o.seed = sub->add_option("--seed", seed, "Master seed");
    o.method = sub->add_option("--method", method, "Interpolation method(s), comma separated");
    o.n = sub->add_option("--n", n, "Points to add (synth: points to generate)");
    o.jobs = sub->add_option("--jobs", jobs, "Worker threads (default: all cores)");
    o.out = sub->add_option("--out", out, "Output directory");
    o.data = sub->add_option("--data", data, "Survey CSV");
    o.mask = sub->add_option("--mask", mask, "Region mask JSON");
    sub->add_flag("--coords-only", coords_only, "Interpolate over coordinates only");
    sub->add_flag("--sample", sample, "Draw augmented values from the predictive distribution");
    per_command[sub->get_name()] = o;
  }

  void apply(RunConfig& cfg, const std::string& command) const {
    const Options& o = per_command.at(command);
    if (o.seed->count()) cfg.seed = seed;
    if (o.method->count()) {
      std::vector<Method> ms;
      std::stringstream ss(method);
      for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) ms.push_back(parse_method(item));
      }
      if (ms.empty()) throw ConfigError("--method: empty method list");
      cfg.methods = ms;
      cfg.method = ms.front();
      if (command == "augment" && ms.size() != 1) throw ConfigError("augment takes exactly one --method");
    }
    if (o.n->count()) {
      if (command == "synth") cfg.synth.n_points = n;
      else cfg.n_added = n;
    }
    if (o.jobs->count()) cfg.jobs = jobs;
    if (o.out->count()) cfg.out = out;
    if (o.data->count()) cfg.data = data;
    if (o.mask->count()) cfg.mask = mask;
    if (coords_only) cfg.coords_only = true;
    if (sample) cfg.sample = true;
  }
};

Bounds bounds_of(const RunConfig& cfg) { return cfg.check_bounds ? Bounds{} : Bounds::unbounded(); }

std::string seeds_line(const std::vector<std::uint64_t>& seeds) {
  std::string s = "seeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i) s += (i ? "," : "") + std::to_string(seeds[i]);
  return s;
}

void wrote(std::ostream& out, const fs::path& p) { out << "wrote " << p.string() << "\n"; }

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
  cfg.require_inputs(false);
  const RegionMask mask = RegionMask::load(cfg.mask);
  SyntheticFieldSpec spec = cfg.synth;
  spec.seed = cfg.seed;
  const SyntheticData s = generate_synthetic(spec, mask);
  const std::string hash = cfg.hash();

  const fs::path csv = cfg.out / "synthetic.csv";
  CsvWriteOptions w;
  w.comments = {"config_hash=" + hash, "synthetic seed=" + std::to_string(spec.seed)};
  save_csv(s.dataset, csv, w);
  nlohmann::ordered_json truth;
  truth["config_hash"] = hash;
  truth["mask"] = cfg.mask.string();
  truth["spec"] = spec.to_json();
  const fs::path tj = cfg.out / "truth.json";
  write_text_file(tj, truth.dump(2) + "\n");
  out << "seed " << spec.seed << "\n";
  wrote(out, csv);
  wrote(out, tj);
}

void cmd_augment(const RunConfig& cfg, std::ostream& out) {
  cfg.require_inputs(true);
  const RegionMask mask = RegionMask::load(cfg.mask);
  const Dataset base = load_csv(cfg.data, bounds_of(cfg));
  const AugmentationPlan plan = cfg.plan(mask);
  const AugmentResult r = augment(base, plan);
  const std::string hash = cfg.hash();

  const fs::path csv = cfg.out / "augmented.csv";
  CsvWriteOptions w;
  w.provenance_column = true;
  w.comments = {"config_hash=" + hash, std::string("method=") + to_string(plan.method),
                "n_added=" + std::to_string(plan.n_points)};
  save_csv(r.dataset, csv, w);

  nlohmann::ordered_json model;
  model["config_hash"] = hash;
  model["method"] = to_string(plan.method);
  model["seed"] = plan.seed;
  model["n_base"] = base.size();
  model["n_added"] = plan.n_points;
  model["interpolator"] = r.model;
  model["variances"] = r.variances;
  const fs::path mj = cfg.out / "model.json";
  write_text_file(mj, model.dump(2) + "\n");
  out << to_string(plan.method) << ": " << base.size() << " + " << plan.n_points << " rows\n";
  wrote(out, csv);
  wrote(out, mj);
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  cfg.require_inputs(true);
  const RegionMask mask = RegionMask::load(cfg.mask);
  const Dataset base = load_csv(cfg.data, bounds_of(cfg));
  const EvalReport rep = run_matrix(base, cfg.method_list(), cfg.regressor_list(), cfg.n_added, cfg.experiment(mask));
  const std::string hash = cfg.hash();
  const std::vector<std::string> extra{seeds_line(rep.seeds), "n_added=" + std::to_string(rep.n_added),
                                       "metric=test MSE"};
  const fs::path csv = cfg.out / "eval.csv", txt = cfg.out / "eval.txt";
  write_text_file(csv, comment_header(hash, extra) + rep.to_csv());
  write_text_file(txt, comment_header(hash, extra) + rep.to_text());
  out << rep.to_text();
  wrote(out, csv);
  wrote(out, txt);
}

RegressorSpec sweep_regressor(const RunConfig& cfg) {
  for (const auto& r : cfg.regressor_list()) {
    if (r.name() == RegressorSpec::from_name(cfg.sweep_regressor).name()) return r;
  }
  return RegressorSpec::from_name(cfg.sweep_regressor);
}

void cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  cfg.require_inputs(true);
  const RegionMask mask = RegionMask::load(cfg.mask);
  const Dataset base = load_csv(cfg.data, bounds_of(cfg));
  const SweepReport rep =
      run_sweep(base, cfg.method_list(), sweep_regressor(cfg), cfg.sweep_grid, cfg.experiment(mask));
  const std::string hash = cfg.hash();
  const std::vector<std::string> extra{seeds_line(rep.seeds), "regressor=" + rep.regressor, "metric=test MSE"};
  const fs::path csv = cfg.out / "sweep.csv", txt = cfg.out / "sweep.txt";
  write_text_file(csv, comment_header(hash, extra) + rep.to_csv());
  write_text_file(txt, comment_header(hash, extra) + rep.to_text());
  out << rep.to_text();
  wrote(out, csv);
  wrote(out, txt);
}

void write_density(const DensityMap& m, const fs::path& stem, const std::string& hash, std::ostream& out) {
  m.write_raster(stem);
  fs::path json = stem;
  json += ".json";
  nlohmann::ordered_json h{{"config_hash", hash}};
  const nlohmann::ordered_json header = m.header();
  for (const auto& [k, v] : header.items()) h[k] = v;
  write_text_file(json, h.dump(2) + "\n");
  fs::path pgm = stem;
  pgm += ".pgm";
  m.write_pgm(pgm);
  wrote(out, json);
}

void cmd_density(const RunConfig& cfg, std::ostream& out) {
  cfg.require_inputs(true);
  const RegionMask mask = RegionMask::load(cfg.mask);
  const Dataset base = load_csv(cfg.data, bounds_of(cfg));
  if (base.count(Provenance::augmented) > 0) throw DataError("density: input already contains augmented rows");
  const std::string hash = cfg.hash();
  const BoundingBox box = mask.bounding_box();

  const DensityMap base_map = kde_density(base, box, cfg.kde);
  write_density(base_map, cfg.out / "density_base", hash, out);
  // Augmented maps reuse the base bandwidth so the rasters are comparable.
  KdeOptions kde = cfg.kde;
  kde.bandwidth_lon = base_map.bandwidth_lon;
  kde.bandwidth_lat = base_map.bandwidth_lat;

  ZoneOverlapReport zones;
  ZoneTestOptions zt = cfg.zone_test;
  zt.seed = cfg.seed;
  for (Method m : cfg.method_list()) {
    RunConfig one = cfg;
    one.method = m;
    const AugmentResult r = augment(base, one.plan(mask));
    write_density(kde_density(r.dataset, box, kde), cfg.out / (std::string("density_") + to_string(m)), hash, out);
    if (!mask.zones().empty()) append_rows(zones, zone_overlap_diff(base, r.dataset, mask, to_string(m), zt));
  }
  const fs::path csv = cfg.out / "zone_overlap.csv";
  write_text_file(csv, comment_header(hash, {"n_added=" + std::to_string(cfg.n_added)}) + zones.to_csv());
  wrote(out, csv);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial data augmentation by GP and kriging interpolation", "geoaug"};
  app.require_subcommand(1);
  Overrides ov;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"synth", "Generate a synthetic survey with known ground truth"},
      {"augment", "Add interpolated samples to a survey"},
      {"evaluate", "Test MSE of every regressor on base and augmented training sets"},
      {"sweep", "Test MSE against the number of added points"},
      {"density", "Density rasters and per-zone cover shifts"}};
  for (const auto& [name, help] : commands) ov.attach(app.add_subcommand(name, help));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::config);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig cfg = ov.config.empty() ? RunConfig{} : RunConfig::load(ov.config);
    ov.apply(cfg, command);
    if (command == "synth") cmd_synth(cfg, out);
    else if (command == "augment") cmd_augment(cfg, out);
    else if (command == "evaluate") cmd_evaluate(cfg, out);
    else if (command == "sweep") cmd_sweep(cfg, out);
    else cmd_density(cfg, out);
    return 0;
  } catch (const Error& e) {
    err << "geoaug " << command << ": " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "geoaug " << command << ": " << e.what() << "\n";
    return static_cast<int>(ErrorKind::data);
  }
}

}  // namespace geoaug::cli
