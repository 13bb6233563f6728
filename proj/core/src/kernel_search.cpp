#include "geoaug/kernel_search.hpp"

#include <future>
#include <map>
#include <optional>

#include "geoaug/errors.hpp"
#include "geoaug/hash.hpp"

namespace geoaug {

namespace {

struct CandidateFit {
  std::optional<GPModel> model;
  ModelScore score;
  std::string error;
};

CandidateFit fit_candidate(const KernelExpr& k, const Matrix& x, const Vector& y, GpFitConfig cfg,
                           std::uint64_t salt) {
  CandidateFit out;
  cfg.seed = derive_seed(cfg.seed, salt);
  try {
    out.model.emplace(fit_gp(k, x, y, cfg));
    out.score = score_model(*out.model);
  } catch (const NumericError& e) {
    out.error = e.what();
  }
  return out;
}

std::vector<CandidateFit> fit_all(const std::vector<KernelExpr>& ks, const Matrix& x, const Vector& y,
                                  const SearchConfig& cfg, std::uint64_t& salt) {
  std::vector<CandidateFit> out(ks.size());
  const std::uint64_t base_salt = salt;
  salt += ks.size();
  if (cfg.jobs <= 1) {
    for (std::size_t i = 0; i < ks.size(); ++i) out[i] = fit_candidate(ks[i], x, y, cfg.fit, base_salt + i);
    return out;
  }
  for (std::size_t start = 0; start < ks.size(); start += cfg.jobs) {
    std::vector<std::future<CandidateFit>> running;
    const std::size_t stop = std::min(ks.size(), start + cfg.jobs);
    for (std::size_t i = start; i < stop; ++i) {
      running.push_back(std::async(std::launch::async, fit_candidate, std::cref(ks[i]), std::cref(x),
                                   std::cref(y), cfg.fit, base_salt + i));
    }
    for (std::size_t i = start; i < stop; ++i) out[i] = running[i - start].get();
  }
  return out;
}

}  // namespace

ModelScore score_model(const GPModel& m) {
  const double ll = m.fit_info() ? m.fit_info()->log_likelihood : m.log_marginal_likelihood().value;
  return bic(ll, m.kernel().num_params() + 1, static_cast<std::size_t>(m.x_train().rows()));
}

nlohmann::ordered_json SearchResult::trace_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : trace) {
    nlohmann::ordered_json e;
    e["level"] = s.level;
    e["kernel"] = s.kernel.to_string();
    e["bic"] = s.score.bic;
    e["log_likelihood"] = s.score.log_likelihood;
    e["k_params"] = s.score.k_params;
    e["accepted"] = s.accepted;
    arr.push_back(std::move(e));
  }
  return arr;
}

SearchResult search_kernel(const Matrix& x, const Vector& y, const SearchConfig& cfg) {
  if (x.rows() < 5) throw NumericError("kernel search: need at least 5 observations");
  if (cfg.max_depth < 1) throw ConfigError("kernel search: max_depth must be >= 1");
  if (cfg.bases.empty()) throw ConfigError("kernel search: no base kernels");

  const BaseInit init = default_base_init(x, y);
  std::vector<SearchStep> trace;
  std::map<std::string, ModelScore> seen;
  std::uint64_t salt = 0;
  std::string last_error;

  std::vector<KernelExpr> level_kernels;
  for (BaseKind b : cfg.bases) {
    level_kernels.push_back(KernelExpr::base(b, init.variance, b == BaseKind::rbf ? init.lengthscale : init.offset));
  }

  std::optional<GPModel> incumbent;
  ModelScore incumbent_score;

  for (std::size_t level = 1; level <= cfg.max_depth; ++level) {
    if (level > 1) {
      // from level 2 on, every step grows the tree by one leaf
      level_kernels.clear();
      for (auto& k : expand_grammar(incumbent->kernel(), cfg.bases, cfg.max_depth, init)) {
        if (!seen.contains(k.structure_key())) level_kernels.push_back(std::move(k));
      }
      if (level_kernels.empty()) break;
    }
    auto fits = fit_all(level_kernels, x, y, cfg, salt);

    std::optional<std::size_t> best;
    std::vector<std::size_t> slot(fits.size(), 0);
    for (std::size_t i = 0; i < fits.size(); ++i) {
      if (!fits[i].model) {
        last_error = fits[i].error;
        continue;
      }
      seen[level_kernels[i].structure_key()] = fits[i].score;
      slot[i] = trace.size();
      trace.push_back({fits[i].model->kernel(), fits[i].score, level, false});
      if (!best || fits[i].score.bic < fits[*best].score.bic) best = i;
    }
    if (!best) {
      if (!incumbent) throw NumericError("kernel search: all candidate fits failed (" + last_error + ")");
      break;
    }
    if (incumbent && !(fits[*best].score.bic < incumbent_score.bic)) break;
    incumbent = std::move(fits[*best].model);
    incumbent_score = fits[*best].score;
    trace[slot[*best]].accepted = true;
  }
  if (!incumbent) throw NumericError("kernel search: all candidate fits failed (" + last_error + ")");
  return SearchResult{std::move(*incumbent), incumbent_score, std::move(trace)};
}

}  // namespace geoaug
