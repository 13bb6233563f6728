#include "geoaug/regressors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

const char* kind_name(RegressorKind k) {
  switch (k) {
    case RegressorKind::lr: return "LR";
    case RegressorKind::rr: return "RR";
    case RegressorKind::knn: return "KNN";
    case RegressorKind::mlp: return "MLP";
  }
  return "?";
}

RegressorKind parse_kind(const std::string& name) {
  std::string u;
  for (char c : name) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (auto k : {RegressorKind::lr, RegressorKind::rr, RegressorKind::knn, RegressorKind::mlp}) {
    if (u == kind_name(k)) return k;
  }
  throw ConfigError("unknown regressor '" + name + "'");
}

/// Activations of every layer; front is the input, back the output.
std::vector<Matrix> forward_all(const MlpNet& net, const Matrix& x) {
  std::vector<Matrix> acts;
  acts.reserve(net.weights.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Matrix z = acts.back() * net.weights[l].transpose();
    z.rowwise() += net.biases[l].transpose();
    if (l + 1 < net.weights.size()) z = z.array().tanh().matrix();
    acts.push_back(std::move(z));
  }
  return acts;
}

void fit_linear(const RegressorSpec& spec, const Matrix& x, const Vector& y, Vector& coef, double& intercept) {
  const Vector mx = x.colwise().mean();
  const double my = y.mean();
  const Matrix xc = x.rowwise() - mx.transpose();
  const Vector yc = y.array() - my;
  Matrix a = xc.transpose() * xc;
  const double alpha = spec.kind == RegressorKind::rr ? spec.alpha : 0.0;
  a.diagonal().array() += alpha;
  const Vector b = xc.transpose() * yc;
  const Index p = a.rows();
  if (p == 0) {
    coef = Vector();
    intercept = my;
    return;
  }
  std::optional<CholeskyFactor> chol;
  try {
    chol.emplace(cholesky(a, JitterSchedule::none()));
  } catch (const NumericError&) {
    throw NumericError(std::string(kind_name(spec.kind)) + ": singular normal equations");
  }
  const Vector d = chol->lower().diagonal();
  const double ratio = d.minCoeff() / d.maxCoeff();
  if (!(ratio * ratio > 1e-13)) throw NumericError(std::string(kind_name(spec.kind)) + ": singular normal equations");
  coef = chol->solve(b);
  intercept = my - mx.dot(coef);
}

}  // namespace

RegressorSpec RegressorSpec::lr() { return RegressorSpec{}; }

RegressorSpec RegressorSpec::rr(double alpha) {
  RegressorSpec s;
  s.kind = RegressorKind::rr;
  s.alpha = alpha;
  return s;
}

RegressorSpec RegressorSpec::knn(std::size_t k) {
  RegressorSpec s;
  s.kind = RegressorKind::knn;
  s.k = k;
  return s;
}

RegressorSpec RegressorSpec::mlp(std::vector<std::size_t> hidden, std::size_t epochs, std::uint64_t seed) {
  RegressorSpec s;
  s.kind = RegressorKind::mlp;
  s.hidden = std::move(hidden);
  s.epochs = epochs;
  s.seed = seed;
  return s;
}

std::string RegressorSpec::name() const { return kind_name(kind); }

void RegressorSpec::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("RR: alpha must be >= 0");
  if (k < 1) throw ConfigError("KNN: k must be >= 1");
  if (kind == RegressorKind::mlp) {
    if (hidden.empty()) throw ConfigError("MLP: at least one hidden layer");
    for (auto h : hidden) {
      if (h < 1) throw ConfigError("MLP: hidden sizes must be >= 1");
    }
    if (epochs < 1) throw ConfigError("MLP: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("MLP: batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("MLP: learning rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("MLP: momentum must be in [0, 1)");
  }
}

nlohmann::ordered_json RegressorSpec::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = name();
  switch (kind) {
    case RegressorKind::lr: break;
    case RegressorKind::rr: j["alpha"] = alpha; break;
    case RegressorKind::knn: j["k"] = k; break;
    case RegressorKind::mlp:
      j["hidden"] = hidden;
      j["activation"] = "tanh";
      j["learning_rate"] = learning_rate;
      j["epochs"] = epochs;
      j["batch_size"] = batch_size;
      j["optimizer"] = optimizer == MlpOptimizer::sgd ? "sgd" : "adam";
      if (optimizer == MlpOptimizer::sgd) j["momentum"] = momentum;
      j["seed"] = seed;
      break;
  }
  return j;
}

RegressorSpec RegressorSpec::from_json(const nlohmann::json& j) {
  try {
    if (j.is_string()) return from_name(j.get<std::string>());
    RegressorSpec s = from_name(j.at("kind").get<std::string>());
    s.alpha = j.value("alpha", s.alpha);
    s.k = j.value("k", s.k);
    if (j.contains("hidden")) s.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    s.learning_rate = j.value("learning_rate", s.learning_rate);
    s.epochs = j.value("epochs", s.epochs);
    s.batch_size = j.value("batch_size", s.batch_size);
    if (j.contains("optimizer")) {
      const auto o = j.at("optimizer").get<std::string>();
      if (o == "sgd") s.optimizer = MlpOptimizer::sgd;
      else if (o == "adam") s.optimizer = MlpOptimizer::adam;
      else throw ConfigError("MLP: unknown optimizer '" + o + "'");
    }
    s.momentum = j.value("momentum", s.momentum);
    s.seed = j.value("seed", s.seed);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("regressor spec: ") + e.what());
  }
}

RegressorSpec RegressorSpec::from_name(const std::string& name) {
  switch (parse_kind(name)) {
    case RegressorKind::lr: return lr();
    case RegressorKind::rr: return rr();
    case RegressorKind::knn: return knn();
    case RegressorKind::mlp: return mlp();
  }
  throw ConfigError("unknown regressor '" + name + "'");
}

// ---------------------------------------------------------------------------
// MLP

std::size_t MlpNet::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

Vector MlpNet::flatten() const {
  Vector theta(static_cast<Index>(num_params()));
  Index o = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    theta.segment(o, weights[l].size()) = weights[l].reshaped();
    o += weights[l].size();
    theta.segment(o, biases[l].size()) = biases[l];
    o += biases[l].size();
  }
  return theta;
}

void MlpNet::unflatten(const Vector& theta) {
  if (theta.size() != static_cast<Index>(num_params())) throw NumericError("mlp: parameter size mismatch");
  Index o = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l].reshaped() = theta.segment(o, weights[l].size());
    o += weights[l].size();
    biases[l] = theta.segment(o, biases[l].size());
    o += biases[l].size();
  }
}

Vector MlpNet::forward(const Matrix& x) const { return forward_all(*this, x).back().col(0); }

MlpNet init_mlp(std::size_t n_inputs, const std::vector<std::size_t>& hidden, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MlpNet net;
  std::size_t fan_in = n_inputs;
  std::vector<std::size_t> sizes = hidden;
  sizes.push_back(1);
  for (std::size_t out : sizes) {
    Matrix w(static_cast<Index>(out), static_cast<Index>(fan_in));
    const double scale = std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    for (Index i = 0; i < w.rows(); ++i) {
      for (Index j = 0; j < w.cols(); ++j) w(i, j) = scale * normal(rng);
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(static_cast<Index>(out)));
    fan_in = out;
  }
  return net;
}

double mlp_loss_and_gradient(const MlpNet& net, const Matrix& x, const Vector& y, Vector* grad) {
  if (x.rows() != y.size() || x.rows() == 0) throw NumericError("mlp: bad batch shape");
  const std::vector<Matrix> acts = forward_all(net, x);
  const auto n = static_cast<double>(x.rows());
  const Vector resid = acts.back().col(0) - y;
  const double loss = resid.squaredNorm() / n;
  if (grad == nullptr) return loss;

  grad->resize(static_cast<Index>(net.num_params()));
  std::vector<Matrix> dw(net.weights.size());
  std::vector<Vector> db(net.weights.size());
  Matrix delta = (2.0 / n) * resid;  // dL/dz at the output, n x 1
  for (std::size_t l = net.weights.size(); l-- > 0;) {
    dw[l] = delta.transpose() * acts[l];
    db[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Matrix back = delta * net.weights[l];
      back.array() *= 1.0 - acts[l].array().square();
      delta = std::move(back);
    }
  }
  Index o = 0;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    grad->segment(o, dw[l].size()) = dw[l].reshaped();
    o += dw[l].size();
    grad->segment(o, db[l].size()) = db[l];
    o += db[l].size();
  }
  return loss;
}

// ---------------------------------------------------------------------------

FittedRegressor fit_regressor(const RegressorSpec& spec, const Matrix& x, const Vector& y) {
  spec.validate();
  if (x.rows() != y.size()) throw DataError("regressor: X and y differ in length");
  if (x.rows() < 2) throw DataError("regressor: need at least 2 samples");
  if (!x.allFinite() || !y.allFinite()) throw DataError("regressor: non-finite input");
  FittedRegressor f;
  f.spec_ = spec;
  f.n_features_ = x.cols();
  switch (spec.kind) {
    case RegressorKind::lr:
    case RegressorKind::rr: fit_linear(spec, x, y, f.coef_, f.intercept_); break;
    case RegressorKind::knn:
      f.x_train_ = x;
      f.y_train_ = y;
      break;
    case RegressorKind::mlp: {
      f.y_mean_ = y.mean();
      const double sd = std::sqrt((y.array() - f.y_mean_).square().mean());
      f.y_scale_ = sd > 0.0 ? sd : 1.0;
      const Vector ys = (y.array() - f.y_mean_) / f.y_scale_;
      std::mt19937_64 rng(spec.seed);
      f.net_ = init_mlp(static_cast<std::size_t>(x.cols()), spec.hidden, rng());
      Vector theta = f.net_.flatten();
      Vector m1 = Vector::Zero(theta.size());
      Vector m2 = Vector::Zero(theta.size());
      const auto n = static_cast<std::size_t>(x.rows());
      const std::size_t bs = std::min(spec.batch_size, n);
      std::vector<Index> order(n);
      std::iota(order.begin(), order.end(), Index{0});
      Matrix xb;
      Vector yb;
      Vector g;
      long step = 0;
      constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
      for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += bs) {
          const std::size_t end = std::min(n, start + bs);
          const auto m = static_cast<Index>(end - start);
          xb.resize(m, x.cols());
          yb.resize(m);
          for (Index i = 0; i < m; ++i) {
            xb.row(i) = x.row(order[start + static_cast<std::size_t>(i)]);
            yb(i) = ys(order[start + static_cast<std::size_t>(i)]);
          }
          mlp_loss_and_gradient(f.net_, xb, yb, &g);
          ++step;
          if (spec.optimizer == MlpOptimizer::sgd) {
            m1 = spec.momentum * m1 - spec.learning_rate * g;
            theta += m1;
          } else {
            m1 = kBeta1 * m1 + (1.0 - kBeta1) * g;
            m2 = kBeta2 * m2 + (1.0 - kBeta2) * g.cwiseProduct(g);
            const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            theta.array() -= spec.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + kEps);
          }
          f.net_.unflatten(theta);
        }
      }
      f.final_loss_ = mlp_loss_and_gradient(f.net_, x, ys, nullptr);
      if (!std::isfinite(f.final_loss_)) throw NumericError("MLP: training diverged");
      break;
    }
  }
  return f;
}

Vector FittedRegressor::predict(const Matrix& x) const {
  if (x.cols() != n_features_) {
    throw DataError("regressor: expected " + std::to_string(n_features_) + " features, got " +
                    std::to_string(x.cols()));
  }
  switch (spec_.kind) {
    case RegressorKind::lr:
    case RegressorKind::rr: return (x * coef_).array() + intercept_;
    case RegressorKind::knn: {
      const auto n = static_cast<std::size_t>(x_train_.rows());
      const std::size_t k = std::min(spec_.k, n);
      Vector out(x.rows());
      std::vector<std::pair<double, std::size_t>> d(n);
      for (Index q = 0; q < x.rows(); ++q) {
        for (std::size_t i = 0; i < n; ++i) {
          d[i] = {(x_train_.row(static_cast<Index>(i)) - x.row(q)).squaredNorm(), i};
        }
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += y_train_(static_cast<Index>(d[i].second));
        out(q) = s / static_cast<double>(k);
      }
      return out;
    }
    case RegressorKind::mlp: return (net_.forward(x).array() * y_scale_ + y_mean_).matrix();
  }
  return {};
}

Vector predict_regressor(const FittedRegressor& f, const Matrix& x) { return f.predict(x); }

}  // namespace geoaug
