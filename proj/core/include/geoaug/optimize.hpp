#pragma once

#include <functional>
#include <optional>

#include "geoaug/numcore.hpp"

namespace geoaug {

struct ObjectiveValue {
  double value = 0.0;
  Vector gradient;
};

/// Returns nullopt where the objective is undefined (e.g. a failed
/// factorization); the line search then backs off.
using Objective = std::function<std::optional<ObjectiveValue>(const Vector&)>;

struct MaximizeOptions {
  int max_iters = 500;
  /// Converged once the gradient infinity-norm drops below this.
  double grad_tol = 1e-5;
  /// Also stop when an accepted step improves the value by less than
  /// rel_value_tol * max(1, |value|).
  double rel_value_tol = 1e-12;
  int history = 10;
  /// Largest per-coordinate move of a single step.
  double max_step = 3.0;
};

struct MaximizeResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Gradient ascent along limited-memory quasi-Newton directions with
/// Armijo backtracking. Throws NumericError if f(x0) is undefined.
MaximizeResult maximize(const Objective& f, Vector x0, const MaximizeOptions& opts = {});

}  // namespace geoaug
