#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoaug/gp.hpp"
#include "geoaug/kernels.hpp"

namespace geoaug {

struct SearchConfig {
  std::vector<BaseKind> bases{BaseKind::lin, BaseKind::rbf, BaseKind::quad};
  /// Maximum number of base kernels in a candidate; 1 means base kernels only.
  std::size_t max_depth = 3;
  GpFitConfig fit{};
  /// Candidate fits evaluated concurrently within one search level.
  unsigned jobs = 1;
};

struct SearchStep {
  KernelExpr kernel;
  ModelScore score;
  std::size_t level = 1;
  bool accepted = false;
};

struct SearchResult {
  GPModel model;
  ModelScore score;
  std::vector<SearchStep> trace;

  const KernelExpr& kernel() const { return model.kernel(); }
  nlohmann::ordered_json trace_json() const;
};

/// BIC score of a fitted model: kernel hyperparameters plus the noise
/// variance count as free parameters.
ModelScore score_model(const GPModel& m);

/// Greedy structure search: fit every base kernel, keep the best by BIC,
/// then repeatedly expand the incumbent with the grammar and move to the
/// best child only if it strictly lowers BIC. Failed candidate fits are
/// recorded nowhere and skipped; if every fit fails the last error is
/// rethrown.
SearchResult search_kernel(const Matrix& x, const Vector& y, const SearchConfig& cfg = {});

}  // namespace geoaug
