#include "geoaug/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "geoaug/errors.hpp"
#include "geoaug/hash.hpp"
#include "geoaug/optimize.hpp"

namespace geoaug {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

/// Log-parameters beyond this magnitude are treated as divergence.
constexpr double kMaxAbsLogParam = 25.0;

double variance_of(const Vector& y) {
  if (y.size() == 0) return 0.0;
  return (y.array() - y.mean()).square().mean();
}

struct LmlParts {
  double value = 0.0;
  Vector kernel_grad;
  double noise_grad = 0.0;  // d/d(noise_var)
};

/// Core evaluation shared by the public function and the optimizer.
std::optional<LmlParts> evaluate_lml(const KernelExpr& kernel, double noise_var, GramWorkspace& ws,
                                     const Vector& centred, bool want_grad) {
  GramWithGrad g = gram_with_grad(kernel, ws, want_grad);
  g.k.diagonal().array() += noise_var;
  std::optional<CholeskyFactor> chol;
  try {
    chol.emplace(cholesky(g.k));
  } catch (const NumericError&) {
    return std::nullopt;
  }
  const Index n = centred.size();
  const Vector alpha = chol->solve(centred);
  LmlParts out;
  out.value = -0.5 * centred.dot(alpha) - 0.5 * chol->log_det() - 0.5 * static_cast<double>(n) * kLog2Pi;
  if (!std::isfinite(out.value)) return std::nullopt;
  if (want_grad) {
    Matrix w = chol->inverse();
    w = alpha * alpha.transpose() - w;
    out.kernel_grad.resize(static_cast<Index>(g.grads.size()));
    for (std::size_t j = 0; j < g.grads.size(); ++j) {
      out.kernel_grad(static_cast<Index>(j)) = 0.5 * w.cwiseProduct(g.grads[j]).sum();
    }
    out.noise_grad = 0.5 * w.trace();
  }
  return out;
}

}  // namespace

double noise_floor(const Vector& y) {
  const double v = variance_of(y);
  return v > 0.0 ? 1e-6 * v : 1e-8;
}

BaseInit default_base_init(const Matrix& x, const Vector& y) {
  BaseInit init;
  const double v = variance_of(y);
  init.variance = v > 0.0 ? v : 1.0;
  std::vector<double> d;
  const Index n = x.rows();
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) d.push_back((x.row(i) - x.row(j)).norm());
  }
  if (!d.empty()) {
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    if (*mid > 0.0) init.lengthscale = *mid;
  }
  init.offset = 1.0;
  return init;
}

GPModel::GPModel(KernelExpr kernel, double noise_var, Matrix x, Vector y, double mean, CholeskyFactor chol)
    : kernel_(std::move(kernel)),
      noise_var_(noise_var),
      x_(std::move(x)),
      y_(std::move(y)),
      mean_(mean),
      chol_(std::move(chol)) {
  alpha_ = chol_.solve(Vector(y_.array() - mean_));
}

GPModel GPModel::condition(KernelExpr kernel, double noise_var, Matrix x, Vector y, std::optional<double> mean,
                           const JitterSchedule& jitter) {
  if (x.rows() != y.size()) throw NumericError("gp: x and y sizes differ");
  if (x.rows() < 1) throw NumericError("gp: no training data");
  if (!(noise_var >= 0.0)) throw NumericError("gp: negative noise variance");
  Matrix k = gram(kernel, x);
  k.diagonal().array() += noise_var;
  CholeskyFactor chol = cholesky(k, jitter);
  const double mu = mean.value_or(y.mean());
  return GPModel(std::move(kernel), noise_var, std::move(x), std::move(y), mu, std::move(chol));
}

LmlResult log_marginal_likelihood(const KernelExpr& kernel, double noise_var, const Matrix& x, const Vector& y,
                                  double mean) {
  if (x.rows() != y.size()) throw NumericError("gp: x and y sizes differ");
  GramWorkspace ws(x);
  const Vector centred = y.array() - mean;
  auto parts = evaluate_lml(kernel, noise_var, ws, centred, true);
  if (!parts) throw NumericError("gp: covariance factorization failed");
  LmlResult r;
  r.value = parts->value;
  r.gradient.resize(parts->kernel_grad.size() + 1);
  r.gradient.head(parts->kernel_grad.size()) = parts->kernel_grad;
  r.gradient(parts->kernel_grad.size()) = parts->noise_grad * noise_var;
  return r;
}

LmlResult GPModel::log_marginal_likelihood() const {
  return geoaug::log_marginal_likelihood(kernel_, noise_var_, x_, y_, mean_);
}

std::vector<GPPrediction> GPModel::predict(const Matrix& xs) const {
  if (xs.cols() != x_.cols()) throw NumericError("gp predict: dimension mismatch");
  const Matrix ks = gram(kernel_, x_, xs);
  const Vector mean = (ks.transpose() * alpha_).array() + mean_;
  const Matrix v = chol_.solve_lower(ks);
  std::vector<GPPrediction> out(static_cast<std::size_t>(xs.rows()));
  for (Index i = 0; i < xs.rows(); ++i) {
    const Vector row = xs.row(i).transpose();
    const double prior = eval_kernel(kernel_, {row.data(), static_cast<std::size_t>(row.size())},
                                     {row.data(), static_cast<std::size_t>(row.size())});
    double var = prior - v.col(i).squaredNorm();
    if (var < 0.0 && var >= -1e-8 * std::max(1.0, std::abs(prior))) var = 0.0;
    out[static_cast<std::size_t>(i)] = {mean(i), var};
  }
  return out;
}

Vector GPModel::predict_mean(const Matrix& xs) const {
  if (xs.cols() != x_.cols()) throw NumericError("gp predict: dimension mismatch");
  return (gram(kernel_, x_, xs).transpose() * alpha_).array() + mean_;
}

std::string GPModel::data_checksum() const {
  Fnv1a h;
  const double rows = static_cast<double>(x_.rows());
  const double cols = static_cast<double>(x_.cols());
  h.update(rows);
  h.update(cols);
  h.update(x_.data(), static_cast<std::size_t>(x_.size()) * sizeof(double));
  h.update(y_.data(), static_cast<std::size_t>(y_.size()) * sizeof(double));
  return h.hex();
}

nlohmann::ordered_json GPModel::to_json() const {
  nlohmann::ordered_json j;
  j["kernel"] = kernel_.to_string();
  const Vector rho = kernel_.log_params();
  j["log_params"] = std::vector<double>(rho.data(), rho.data() + rho.size());
  j["param_names"] = kernel_.param_names();
  j["noise_var"] = noise_var_;
  j["mean"] = mean_;
  j["jitter"] = chol_.jitter();
  j["n_train"] = x_.rows();
  j["n_features"] = x_.cols();
  j["training_checksum"] = data_checksum();
  if (info_) {
    j["log_likelihood"] = info_->log_likelihood;
    j["iterations"] = info_->iterations;
    j["converged"] = info_->converged;
  }
  return j;
}

GPModel GPModel::from_json(const nlohmann::json& j, Matrix x, Vector y) {
  try {
    KernelExpr k = KernelExpr::parse(j.at("kernel").get<std::string>());
    if (j.contains("log_params")) {
      const auto lp = j.at("log_params").get<std::vector<double>>();
      k = k.with_log_params(Eigen::Map<const Vector>(lp.data(), static_cast<Index>(lp.size())));
    }
    GPModel m = condition(k, j.at("noise_var").get<double>(), std::move(x), std::move(y), j.at("mean").get<double>());
    if (m.data_checksum() != j.at("training_checksum").get<std::string>()) {
      throw DataError("gp model: training data checksum mismatch");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("gp model json: ") + e.what());
  }
}

GPModel fit_gp(const KernelExpr& init, const Matrix& x, const Vector& y, const GpFitConfig& cfg) {
  if (x.rows() != y.size()) throw NumericError("gp fit: x and y sizes differ");
  if (x.rows() < 2) throw NumericError("gp fit: need at least 2 training points");

  const double mu = y.mean();
  const Vector centred = y.array() - mu;
  const double floor = noise_floor(y);
  const double var_y = variance_of(y);
  const auto n_kernel = static_cast<Index>(init.num_params());

  GramWorkspace ws(x);
  // noise_var = floor + exp(last parameter)
  Objective objective = [&](const Vector& rho) -> std::optional<ObjectiveValue> {
    if (rho.cwiseAbs().maxCoeff() > kMaxAbsLogParam) return std::nullopt;
    const KernelExpr k = init.with_log_params(rho.head(n_kernel));
    const double excess = std::exp(rho(n_kernel));
    auto parts = evaluate_lml(k, floor + excess, ws, centred, true);
    if (!parts) return std::nullopt;
    ObjectiveValue v;
    v.value = parts->value;
    v.gradient.resize(n_kernel + 1);
    v.gradient.head(n_kernel) = parts->kernel_grad;
    v.gradient(n_kernel) = parts->noise_grad * excess;
    return v;
  };

  Vector start(n_kernel + 1);
  start.head(n_kernel) = init.log_params();
  start(n_kernel) = std::log(std::max(0.1 * var_y, 1e-6));

  MaximizeOptions opts;
  opts.max_iters = cfg.max_iters;
  opts.grad_tol = cfg.tol;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::optional<MaximizeResult> best;
  GpFitInfo info;
  std::string last_error = "no restarts attempted";
  const int restarts = std::max(1, cfg.restarts);
  for (int r = 0; r < restarts; ++r) {
    Vector x0 = start;
    if (r > 0) {
      for (Index i = 0; i < x0.size(); ++i) x0(i) += normal(rng);
    }
    try {
      MaximizeResult res = maximize(objective, x0, opts);
      ++info.successful_restarts;
      info.iterations += res.iterations;
      info.evaluations += res.evaluations;
      if (!best || res.value > best->value) best = std::move(res);
    } catch (const NumericError& e) {
      last_error = e.what();
    }
  }
  if (!best) throw NumericError("gp fit: all restarts failed (" + last_error + ")");

  info.log_likelihood = best->value;
  info.converged = best->converged;
  const KernelExpr fitted = init.with_log_params(best->x.head(n_kernel));
  const double noise = floor + std::exp(best->x(n_kernel));
  GPModel model = GPModel::condition(fitted, noise, x, y, mu);
  model.info_ = info;
  return model;
}

}  // namespace geoaug
