#include "geoaug/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "geoaug/errors.hpp"
#include "geoaug/hash.hpp"
#include "geoaug/report_io.hpp"
#include "text_util.hpp"

namespace geoaug {

namespace {

/// Runs fn(0..n-1) on up to `jobs` threads; the first failure by task
/// index is rethrown after all tasks finish.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Re-throws with the failing cell named, keeping the error category.
[[noreturn]] void rethrow_annotated(const std::string& where) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.what());
  }
}

Vector targets(const Dataset& d) {
  const auto c = d.covers();
  return Eigen::Map<const Vector>(c.data(), static_cast<Index>(c.size()));
}

RegressorSpec seeded(const RegressorSpec& spec, std::uint64_t seed) {
  RegressorSpec s = spec;
  s.seed = derive_seed(seed, spec.seed);
  return s;
}

/// Data that every method of one repetition shares.
struct SeedContext {
  SeedPlan plan;
  TrainTestSplit split;
  FeatureScaler scaler;
  Matrix x_test;
  Vector y_test;
  std::vector<CandidatePoint> completed;
};

SeedContext prepare_seed(const Dataset& base, std::uint64_t seed, std::size_t n_candidates,
                         const ExperimentConfig& cfg) {
  SeedContext ctx;
  ctx.plan = SeedPlan::from(seed);
  ctx.split = split_train_test(base, cfg.test_fraction, ctx.plan.split);
  if (ctx.split.test.count(Provenance::augmented) != 0) {
    throw DataError("evaluation: test fold contains augmented samples");
  }
  ctx.scaler = FeatureScaler::fit(feature_matrix(ctx.split.train, cfg.features));
  ctx.x_test = ctx.scaler.transform(feature_matrix(ctx.split.test, cfg.features));
  ctx.y_test = targets(ctx.split.test);
  if (n_candidates > 0) {
    const auto candidates =
        sample_candidates(cfg.mask, n_candidates, cfg.year_min, cfg.year_max, ctx.plan.candidates);
    const auto provider = make_provider(cfg.provider);
    ctx.completed = fetch_all(candidates, *provider, cfg.provider.max_in_flight);
  }
  return ctx;
}

double score(const SeedContext& ctx, const Dataset& train, const RegressorSpec& spec,
             const ExperimentConfig& cfg) {
  const Matrix x = ctx.scaler.transform(feature_matrix(train, cfg.features));
  const FittedRegressor f = fit_regressor(seeded(spec, ctx.plan.regressor), x, targets(train));
  return mse(f.predict(ctx.x_test), ctx.y_test);
}

/// Training portion plus `n` interpolated rows.
Dataset augmented_train(const SeedContext& ctx, Method method, std::size_t n, const ExperimentConfig& cfg) {
  if (n == 0) return ctx.split.train;
  std::vector<CandidatePoint> first(ctx.completed.begin(), ctx.completed.begin() + static_cast<std::ptrdiff_t>(n));
  const Interpolator interp = Interpolator::fit(ctx.split.train, method, cfg.interpolator, ctx.plan.interpolator);
  Dataset d = augment_with(ctx.split.train, interp, first, cfg.clamp, cfg.sample, ctx.plan.interpolator).dataset;
  if (d.count(Provenance::augmented) != n) throw DataError("evaluation: unexpected augmented row count");
  return d;
}

std::string seeds_text(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(format_double(x));
  return join(parts, ";");
}

}  // namespace

double mse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw DataError("mse: length mismatch");
  if (predictions.empty()) throw DataError("mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    s += d * d;
  }
  return s / static_cast<double>(predictions.size());
}

double mse(const Vector& predictions, const Vector& targets) {
  return mse(std::span<const double>(predictions.data(), static_cast<std::size_t>(predictions.size())),
             std::span<const double>(targets.data(), static_cast<std::size_t>(targets.size())));
}

SeedPlan SeedPlan::from(std::uint64_t seed) {
  return {derive_seed(seed, 10), derive_seed(seed, 20), derive_seed(seed, 30), derive_seed(seed, 40)};
}

CellStats CellStats::of(std::vector<double> values) {
  CellStats c;
  if (!values.empty()) {
    double s = 0.0;
    for (double v : values) s += v;
    c.mean = s / static_cast<double>(values.size());
    double q = 0.0;
    for (double v : values) q += (v - c.mean) * (v - c.mean);
    c.std = std::sqrt(q / static_cast<double>(values.size()));
  }
  c.per_seed = std::move(values);
  return c;
}

// ---------------------------------------------------------------------------
// Matrix

const CellStats& EvalReport::cell(const std::string& regressor, const std::string& column) const {
  const auto r = std::find(regressors.begin(), regressors.end(), regressor);
  const auto c = std::find(columns.begin(), columns.end(), column);
  if (r == regressors.end() || c == columns.end()) throw ConfigError("report has no cell " + regressor + "/" + column);
  return cells[static_cast<std::size_t>(r - regressors.begin())][static_cast<std::size_t>(c - columns.begin())];
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "regressor,column,mse_mean,mse_std,mse_per_seed\n";
  for (std::size_t r = 0; r < regressors.size(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& cell = cells[r][c];
      out << regressors[r] << ',' << columns[c] << ',' << format_double(cell.mean) << ',' << format_double(cell.std)
          << ',' << seeds_text(cell.per_seed) << '\n';
    }
  }
  return out.str();
}

std::string EvalReport::to_text() const {
  std::vector<std::string> header{"MSE"};
  header.insert(header.end(), columns.begin(), columns.end());
  std::vector<std::vector<std::string>> rows;
  for (std::size_t r = 0; r < regressors.size(); ++r) {
    std::vector<std::string> row{regressors[r]};
    for (const auto& cell : cells[r]) row.push_back(format_fixed(cell.mean, 2) + " (" + format_fixed(cell.std, 2) + ")");
    rows.push_back(std::move(row));
  }
  std::string out = format_table(header, rows);
  out += "test MSE, mean (std) over " + std::to_string(seeds.size()) + " seeds; test fraction " +
         format_double(test_fraction) + "; " + std::to_string(n_added) + " points added\n";
  return out;
}

EvalReport run_matrix(const Dataset& base, const std::vector<Method>& methods,
                      const std::vector<RegressorSpec>& regressors, std::size_t n_added,
                      const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw ConfigError("run_matrix: no seeds");
  if (regressors.empty()) throw ConfigError("run_matrix: no regressors");
  if (base.count(Provenance::augmented) != 0) throw DataError("run_matrix: base data must be observed only");

  std::vector<SeedContext> contexts(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t s) {
    try {
      contexts[s] = prepare_seed(base, cfg.seeds[s], n_added, cfg);
    } catch (...) {
      rethrow_annotated("seed " + std::to_string(cfg.seeds[s]));
    }
  });

  const std::size_t n_cols = methods.size() + 1;
  // results[seed][column][regressor]
  std::vector<std::vector<std::vector<double>>> results(
      cfg.seeds.size(), std::vector<std::vector<double>>(n_cols, std::vector<double>(regressors.size(), 0.0)));
  parallel_for(cfg.seeds.size() * n_cols, cfg.jobs, [&](std::size_t task) {
    const std::size_t s = task / n_cols;
    const std::size_t c = task % n_cols;
    const std::string column = c == 0 ? "Base" : to_string(methods[c - 1]);
    try {
      const SeedContext& ctx = contexts[s];
      const Dataset train = c == 0 ? ctx.split.train : augmented_train(ctx, methods[c - 1], n_added, cfg);
      for (std::size_t r = 0; r < regressors.size(); ++r) results[s][c][r] = score(ctx, train, regressors[r], cfg);
    } catch (...) {
      rethrow_annotated("seed " + std::to_string(cfg.seeds[s]) + ", " + column);
    }
  });

  EvalReport rep;
  rep.seeds = cfg.seeds;
  rep.test_fraction = cfg.test_fraction;
  rep.n_added = n_added;
  rep.columns.push_back("Base");
  for (Method m : methods) rep.columns.push_back(to_string(m));
  for (const auto& spec : regressors) rep.regressors.push_back(spec.name());
  rep.cells.assign(regressors.size(), std::vector<CellStats>(n_cols));
  for (std::size_t r = 0; r < regressors.size(); ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      std::vector<double> v;
      for (std::size_t s = 0; s < cfg.seeds.size(); ++s) v.push_back(results[s][c][r]);
      rep.cells[r][c] = CellStats::of(std::move(v));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Sweep

std::vector<std::size_t> default_sweep_grid() { return {0, 50, 100, 150, 200, 250, 300}; }

const SweepSeries& SweepReport::of(const std::string& method) const {
  for (const auto& s : series) {
    if (s.method == method) return s;
  }
  throw ConfigError("sweep report has no method " + method);
}

std::string SweepReport::to_csv() const {
  std::ostringstream out;
  out << "method,regressor,n_added,mse_mean,mse_std,mse_per_seed\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out << s.method << ',' << regressor << ',' << p.n_added << ',' << format_double(p.mse.mean) << ','
          << format_double(p.mse.std) << ',' << seeds_text(p.mse.per_seed) << '\n';
    }
  }
  return out.str();
}

std::string SweepReport::to_text() const {
  std::vector<std::string> header{"n_added"};
  for (const auto& s : series) header.push_back(s.method);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<std::string> row{std::to_string(grid[i])};
    for (const auto& s : series) {
      row.push_back(format_fixed(s.points[i].mse.mean, 2) + " (" + format_fixed(s.points[i].mse.std, 2) + ")");
    }
    rows.push_back(std::move(row));
  }
  return format_table(header, rows) + regressor + " test MSE, mean (std) over " + std::to_string(seeds.size()) +
         " seeds\n";
}

SweepReport run_sweep(const Dataset& base, const std::vector<Method>& methods, const RegressorSpec& regressor,
                      const std::vector<std::size_t>& grid, const ExperimentConfig& cfg) {
  if (grid.empty() || grid.front() != 0 || !std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw ConfigError("sweep grid must be strictly ascending and start at 0");
  }
  if (cfg.seeds.empty()) throw ConfigError("run_sweep: no seeds");
  if (methods.empty()) throw ConfigError("run_sweep: no methods");
  const std::size_t n_max = grid.back();

  std::vector<SeedContext> contexts(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t s) {
    try {
      contexts[s] = prepare_seed(base, cfg.seeds[s], n_max, cfg);
    } catch (...) {
      rethrow_annotated("seed " + std::to_string(cfg.seeds[s]));
    }
  });

  // results[seed][method][grid index]
  std::vector<std::vector<std::vector<double>>> results(
      cfg.seeds.size(), std::vector<std::vector<double>>(methods.size(), std::vector<double>(grid.size(), 0.0)));
  parallel_for(cfg.seeds.size() * methods.size(), cfg.jobs, [&](std::size_t task) {
    const std::size_t s = task / methods.size();
    const std::size_t m = task % methods.size();
    try {
      const SeedContext& ctx = contexts[s];
      const Dataset full = augmented_train(ctx, methods[m], n_max, cfg);
      const std::size_t n_train = ctx.split.train.size();
      for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<std::size_t> idx(n_train + grid[g]);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        results[s][m][g] = score(ctx, full.subset(idx), regressor, cfg);
      }
    } catch (...) {
      rethrow_annotated("seed " + std::to_string(cfg.seeds[s]) + ", " + to_string(methods[m]));
    }
  });

  SweepReport rep;
  rep.regressor = regressor.name();
  rep.grid = grid;
  rep.seeds = cfg.seeds;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    SweepSeries series{to_string(methods[m]), {}};
    for (std::size_t g = 0; g < grid.size(); ++g) {
      std::vector<double> v;
      for (std::size_t s = 0; s < cfg.seeds.size(); ++s) v.push_back(results[s][m][g]);
      series.points.push_back({grid[g], CellStats::of(std::move(v))});
    }
    rep.series.push_back(std::move(series));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Density

double DensityMap::cell_area() const {
  return (extent.width() / static_cast<double>(nx)) * (extent.height() / static_cast<double>(ny));
}

double DensityMap::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_area();
}

nlohmann::ordered_json DensityMap::header() const {
  nlohmann::ordered_json j;
  j["format"] = "float64-le";
  j["layout"] = "row-major, row 0 southernmost, cell centres";
  j["nx"] = nx;
  j["ny"] = ny;
  j["extent"] = {{"lon_min", extent.lon_min}, {"lon_max", extent.lon_max}, {"lat_min", extent.lat_min},
                 {"lat_max", extent.lat_max}};
  j["bandwidth"] = {bandwidth_lon, bandwidth_lat};
  j["integral"] = integral();
  return j;
}

void DensityMap::write_raster(const std::filesystem::path& stem) const {
  auto json_path = stem;
  json_path += ".json";
  auto bin_path = stem;
  bin_path += ".f64";
  write_text_file(json_path, header().dump(2) + "\n");
  std::vector<char> bytes(values.size() * sizeof(double));
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (std::size_t b = 0; b < 8; ++b) {
      bytes[i * 8 + b] = static_cast<char>(static_cast<unsigned char>(bits & 0xFF));
      bits >>= 8;
    }
  }
  write_binary_file(bin_path, bytes);
}

DensityMap DensityMap::read_raster(const std::filesystem::path& stem) {
  auto json_path = stem;
  json_path += ".json";
  auto bin_path = stem;
  bin_path += ".f64";
  std::ifstream hin(json_path);
  if (!hin) throw DataError("cannot open " + json_path.string());
  DensityMap m;
  try {
    nlohmann::json h;
    hin >> h;
    m.nx = h.at("nx").get<std::size_t>();
    m.ny = h.at("ny").get<std::size_t>();
    const auto& e = h.at("extent");
    m.extent = {e.at("lon_min").get<double>(), e.at("lon_max").get<double>(), e.at("lat_min").get<double>(),
                e.at("lat_max").get<double>()};
    m.bandwidth_lon = h.at("bandwidth").at(0).get<double>();
    m.bandwidth_lat = h.at("bandwidth").at(1).get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(json_path.string() + ": " + e.what());
  }
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError("cannot open " + bin_path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  if (bytes.size() != m.nx * m.ny * 8) throw DataError(bin_path.string() + ": size does not match header");
  m.values.resize(m.nx * m.ny);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    std::uint64_t bits = 0;
    for (std::size_t b = 8; b-- > 0;) bits = (bits << 8) | bytes[i * 8 + b];
    m.values[i] = std::bit_cast<double>(bits);
  }
  return m;
}

void DensityMap::write_pgm(const std::filesystem::path& path) const {
  const double vmax = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  std::string out = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n255\n";
  for (std::size_t row = 0; row < ny; ++row) {
    const std::size_t j = ny - 1 - row;
    for (std::size_t i = 0; i < nx; ++i) {
      const double t = vmax > 0.0 ? at(i, j) / vmax : 0.0;
      out += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0))));
    }
  }
  write_text_file(path, out);
}

DensityMap kde_density(const Dataset& d, const BoundingBox& extent, const KdeOptions& opts) {
  if (d.empty()) throw DataError("kde: empty dataset");
  if (opts.nx < 1 || opts.ny < 1) throw ConfigError("kde: resolution must be >= 1");
  if (!(extent.width() > 0.0) || !(extent.height() > 0.0)) throw ConfigError("kde: degenerate extent");
  double wsum = 0.0;
  for (const auto& s : d.samples()) wsum += s.cover;
  if (!(wsum > 0.0)) throw DataError("kde: all cover weights are zero");

  const auto n = static_cast<double>(d.size());
  auto scott = [&](auto field, double span) {
    double mean = 0.0;
    for (const auto& s : d.samples()) mean += field(s);
    mean /= n;
    double var = 0.0;
    for (const auto& s : d.samples()) var += (field(s) - mean) * (field(s) - mean);
    const double sd = d.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    const double h = std::pow(n, -1.0 / 6.0) * sd;
    return h > 0.0 ? h : 0.05 * span;
  };
  DensityMap m;
  m.extent = extent;
  m.nx = opts.nx;
  m.ny = opts.ny;
  m.bandwidth_lon = opts.bandwidth_lon.value_or(scott([](const GeoSample& s) { return s.longitude; }, extent.width()));
  m.bandwidth_lat = opts.bandwidth_lat.value_or(scott([](const GeoSample& s) { return s.latitude; }, extent.height()));
  if (!(m.bandwidth_lon > 0.0) || !(m.bandwidth_lat > 0.0)) throw ConfigError("kde: bandwidth must be > 0");

  const double dx = extent.width() / static_cast<double>(m.nx);
  const double dy = extent.height() / static_cast<double>(m.ny);
  // Separable kernel: exp(-(dlon/h)^2/2) * exp(-(dlat/h)^2/2)
  std::vector<double> gx(m.nx), gy(m.ny);
  m.values.assign(m.nx * m.ny, 0.0);
  for (const auto& s : d.samples()) {
    if (s.cover <= 0.0) continue;
    for (std::size_t i = 0; i < m.nx; ++i) {
      const double u = (extent.lon_min + (static_cast<double>(i) + 0.5) * dx - s.longitude) / m.bandwidth_lon;
      gx[i] = std::exp(-0.5 * u * u);
    }
    for (std::size_t j = 0; j < m.ny; ++j) {
      const double v = (extent.lat_min + (static_cast<double>(j) + 0.5) * dy - s.latitude) / m.bandwidth_lat;
      gy[j] = s.cover * std::exp(-0.5 * v * v);
    }
    for (std::size_t j = 0; j < m.ny; ++j) {
      double* row = m.values.data() + j * m.nx;
      for (std::size_t i = 0; i < m.nx; ++i) row[i] += gy[j] * gx[i];
    }
  }
  double total = 0.0;
  for (double v : m.values) total += v;
  if (!(total > 0.0)) throw NumericError("kde: density underflows on the raster; widen the extent or bandwidth");
  const double scale = 1.0 / (total * m.cell_area());
  for (double& v : m.values) v *= scale;
  return m;
}

// ---------------------------------------------------------------------------
// Zone overlap

const ZoneOverlapRow& ZoneOverlapReport::at(const std::string& zone, const std::string& method) const {
  for (const auto& r : rows) {
    if (r.zone == zone && r.method == method) return r;
  }
  throw ConfigError("zone report has no row " + zone + "/" + method);
}

std::string ZoneOverlapReport::to_csv() const {
  std::ostringstream out;
  out << "zone,method,delta,p_value,significant,n_base,n_added\n";
  for (const auto& r : rows) {
    out << r.zone << ',' << r.method << ',' << format_double(r.delta) << ',' << format_double(r.p_value) << ','
        << (r.significant ? "true" : "false") << ',' << r.n_base << ',' << r.n_added << '\n';
  }
  return out.str();
}

void append_rows(ZoneOverlapReport& into, const ZoneOverlapReport& from) {
  into.rows.insert(into.rows.end(), from.rows.begin(), from.rows.end());
}

ZoneOverlapReport zone_overlap_diff(const Dataset& base, const Dataset& augmented, const RegionMask& mask,
                                    const std::string& method, const ZoneTestOptions& opts) {
  if (mask.zones().empty()) throw ConfigError("zone overlap: mask has no zones");
  const std::size_t n_zones = mask.zones().size();
  auto zone_index = [&](const GeoSample& s) -> std::optional<std::size_t> {
    const auto z = mask.zone_of({s.longitude, s.latitude});
    if (!z) return std::nullopt;
    for (std::size_t i = 0; i < n_zones; ++i) {
      if (mask.zones()[i].name == *z) return i;
    }
    return std::nullopt;
  };

  std::vector<std::vector<double>> base_vals(n_zones), all_vals(n_zones), added_vals(n_zones);
  for (const auto& s : base.samples()) {
    if (auto z = zone_index(s)) base_vals[*z].push_back(s.cover);
  }
  for (std::size_t i = 0; i < augmented.size(); ++i) {
    const auto& s = augmented[i];
    const auto z = zone_index(s);
    if (!z) continue;
    all_vals[*z].push_back(s.cover);
    if (augmented.provenance()[i] == Provenance::augmented) added_vals[*z].push_back(s.cover);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };

  ZoneOverlapReport rep;
  for (std::size_t z = 0; z < n_zones; ++z) {
    const std::string& name = mask.zones()[z].name;
    if (base_vals[z].empty()) throw DataError("zone overlap: no base samples in zone '" + name + "'");
    ZoneOverlapRow row;
    row.zone = name;
    row.method = method;
    row.n_base = base_vals[z].size();
    row.n_added = added_vals[z].size();
    row.delta = all_vals[z].empty() ? -mean(base_vals[z]) : mean(all_vals[z]) - mean(base_vals[z]);

    if (row.n_added > 0 && opts.permutations > 0) {
      std::vector<double> pool = base_vals[z];
      pool.insert(pool.end(), added_vals[z].begin(), added_vals[z].end());
      const double pool_mean = mean(pool);
      const double observed = pool_mean - mean(base_vals[z]);
      const double tol = 1e-12 * std::max(1.0, std::abs(observed));
      std::mt19937_64 rng(derive_seed(opts.seed, z));
      std::size_t extreme = 0;
      const std::size_t nb = base_vals[z].size();
      for (std::size_t p = 0; p < opts.permutations; ++p) {
        // Partial Fisher-Yates: the first nb entries become the relabelled base group.
        for (std::size_t i = 0; i < nb; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
          std::swap(pool[i], pool[pick(rng)]);
        }
        double s = 0.0;
        for (std::size_t i = 0; i < nb; ++i) s += pool[i];
        const double stat = pool_mean - s / static_cast<double>(nb);
        if (std::abs(stat) >= std::abs(observed) - tol) ++extreme;
      }
      row.p_value = static_cast<double>(1 + extreme) / static_cast<double>(1 + opts.permutations);
      row.significant = row.p_value < opts.alpha;
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace geoaug
