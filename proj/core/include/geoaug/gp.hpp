#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoaug/kernels.hpp"
#include "geoaug/numcore.hpp"

namespace geoaug {

struct GPPrediction {
  double mean = 0.0;
  /// Latent posterior variance (no observation noise).
  double variance = 0.0;
};

struct GpFitConfig {
  int max_iters = 500;
  double tol = 1e-5;
  int restarts = 3;
  std::uint64_t seed = 0;
};

struct LmlResult {
  double value = 0.0;
  /// d/d(log theta) for every kernel hyperparameter in traversal order,
  /// followed by d/d(log noise_var).
  Vector gradient;
};

struct GpFitInfo {
  double log_likelihood = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int successful_restarts = 0;
  bool converged = false;
};

/// Gaussian-process regressor with constant mean, conditioned on training
/// data. Immutable; the Cholesky factor of K + noise_var*I is computed once.
class GPModel {
 public:
  /// Conditions on (x, y) with fixed hyperparameters. The constant mean
  /// defaults to the sample mean of y.
  static GPModel condition(KernelExpr kernel, double noise_var, Matrix x, Vector y,
                           std::optional<double> mean = std::nullopt, const JitterSchedule& jitter = {});

  const KernelExpr& kernel() const noexcept { return kernel_; }
  double noise_var() const noexcept { return noise_var_; }
  double mean() const noexcept { return mean_; }
  const Matrix& x_train() const noexcept { return x_; }
  const Vector& y_train() const noexcept { return y_; }
  double jitter() const noexcept { return chol_.jitter(); }
  const CholeskyFactor& factor() const noexcept { return chol_; }
  const std::optional<GpFitInfo>& fit_info() const noexcept { return info_; }

  LmlResult log_marginal_likelihood() const;

  std::vector<GPPrediction> predict(const Matrix& xs) const;
  Vector predict_mean(const Matrix& xs) const;

  /// Checksum of the training inputs and targets.
  std::string data_checksum() const;

  nlohmann::ordered_json to_json() const;
  /// Rebuilds a saved model; the supplied training data must match the
  /// stored checksum.
  static GPModel from_json(const nlohmann::json& j, Matrix x, Vector y);

 private:
  GPModel(KernelExpr kernel, double noise_var, Matrix x, Vector y, double mean, CholeskyFactor chol);

  KernelExpr kernel_;
  double noise_var_;
  Matrix x_;
  Vector y_;
  double mean_;
  CholeskyFactor chol_;
  Vector alpha_;
  std::optional<GpFitInfo> info_;

  friend GPModel fit_gp(const KernelExpr&, const Matrix&, const Vector&, const GpFitConfig&);
};

LmlResult log_marginal_likelihood(const KernelExpr& kernel, double noise_var, const Matrix& x,
                                  const Vector& y, double mean);

/// Lower bound on the trained noise variance: 1e-6 * var(y), or 1e-8 for a
/// constant target.
double noise_floor(const Vector& y);

/// Data-driven hyperparameters for fresh leaves: variance = var(y),
/// lengthscale = median pairwise distance, offset = 1.
BaseInit default_base_init(const Matrix& x, const Vector& y);

/// Maximizes the log marginal likelihood over the kernel hyperparameters
/// and the noise variance (both in log space), starting from `init` and
/// from `restarts - 1` Gaussian perturbations of it; the best restart wins.
GPModel fit_gp(const KernelExpr& init, const Matrix& x, const Vector& y, const GpFitConfig& cfg = {});

}  // namespace geoaug
