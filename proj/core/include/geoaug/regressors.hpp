#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoaug/numcore.hpp"

namespace geoaug {

enum class RegressorKind { lr, rr, knn, mlp };
enum class MlpOptimizer { sgd, adam };

struct RegressorSpec {
  RegressorKind kind = RegressorKind::lr;
  double alpha = 1.0;  // RR penalty
  std::size_t k = 5;   // KNN neighbours
  // MLP
  std::vector<std::size_t> hidden{64};
  double learning_rate = 1e-3;
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
  MlpOptimizer optimizer = MlpOptimizer::sgd;
  double momentum = 0.9;  // sgd only
  std::uint64_t seed = 0;

  static RegressorSpec lr();
  static RegressorSpec rr(double alpha = 1.0);
  static RegressorSpec knn(std::size_t k = 5);
  static RegressorSpec mlp(std::vector<std::size_t> hidden = {64}, std::size_t epochs = 500, std::uint64_t seed = 0);

  /// "LR", "RR", "KNN", "MLP"
  std::string name() const;
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static RegressorSpec from_json(const nlohmann::json& j);
  /// Default spec for a name as accepted by name().
  static RegressorSpec from_name(const std::string& name);
};

/// Fully connected tanh network with a linear scalar output.
struct MlpNet {
  std::vector<Matrix> weights;  // layer l: out x in
  std::vector<Vector> biases;

  std::size_t num_params() const;
  Vector flatten() const;
  void unflatten(const Vector& theta);
  Vector forward(const Matrix& x) const;
};

/// He-scaled normal weights (variance 2 / fan_in), zero biases.
MlpNet init_mlp(std::size_t n_inputs, const std::vector<std::size_t>& hidden, std::uint64_t seed);

/// Mean squared error of the network on (x, y) and, when `grad` is given,
/// its gradient by backpropagation in flatten() order.
double mlp_loss_and_gradient(const MlpNet& net, const Matrix& x, const Vector& y, Vector* grad);

class FittedRegressor {
 public:
  const RegressorSpec& spec() const noexcept { return spec_; }
  Index n_features() const noexcept { return n_features_; }

  Vector predict(const Matrix& x) const;

  /// LR/RR only.
  const Vector& coefficients() const noexcept { return coef_; }
  double intercept() const noexcept { return intercept_; }
  /// MLP only; works on standardized targets.
  const MlpNet& network() const noexcept { return net_; }
  double final_training_loss() const noexcept { return final_loss_; }

 private:
  friend FittedRegressor fit_regressor(const RegressorSpec&, const Matrix&, const Vector&);

  RegressorSpec spec_;
  Index n_features_ = 0;
  Vector coef_;
  double intercept_ = 0.0;
  Matrix x_train_;
  Vector y_train_;
  MlpNet net_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double final_loss_ = 0.0;
};

/// LR/RR: centred normal equations, intercept unpenalized. KNN: stores the
/// data. MLP: mini-batch training on standardized targets with a fixed seed.
FittedRegressor fit_regressor(const RegressorSpec& spec, const Matrix& x, const Vector& y);

Vector predict_regressor(const FittedRegressor& f, const Matrix& x);

}  // namespace geoaug
