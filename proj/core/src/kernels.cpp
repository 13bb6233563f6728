#include "geoaug/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "geoaug/errors.hpp"
#include "text_util.hpp"

namespace geoaug {

const char* to_string(BaseKind k) noexcept {
  switch (k) {
    case BaseKind::lin: return "LIN";
    case BaseKind::rbf: return "RBF";
    case BaseKind::quad: return "QUAD";
  }
  return "?";
}

struct KernelExpr::Node {
  KernelOp op = KernelOp::base;
  BaseKind kind = BaseKind::lin;
  double variance = 1.0;
  double second = 1.0;  // lengthscale (RBF) or offset (QUAD)
  std::vector<std::size_t> dims;
  std::vector<KernelExpr> children;  // empty for leaves, {left, right} otherwise
  std::size_t n_params = 0;
  std::size_t n_leaves = 1;
  std::size_t depth = 1;
};

namespace {

std::size_t leaf_param_count(BaseKind kind) { return kind == BaseKind::lin ? 1 : 2; }

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("kernel ") + what + " must be positive and finite");
  }
}

}  // namespace

KernelExpr KernelExpr::base(BaseKind kind, double variance, double second, std::vector<std::size_t> dims) {
  check_positive(variance, "variance");
  if (kind != BaseKind::lin) check_positive(second, kind == BaseKind::rbf ? "lengthscale" : "offset");
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  auto n = std::make_shared<Node>();
  n->op = KernelOp::base;
  n->kind = kind;
  n->variance = variance;
  n->second = kind == BaseKind::lin ? 1.0 : second;
  n->dims = std::move(dims);
  n->n_params = leaf_param_count(kind);
  return KernelExpr(std::move(n));
}

KernelExpr KernelExpr::lin(double variance, std::vector<std::size_t> dims) {
  return base(BaseKind::lin, variance, 1.0, std::move(dims));
}
KernelExpr KernelExpr::rbf(double variance, double lengthscale, std::vector<std::size_t> dims) {
  return base(BaseKind::rbf, variance, lengthscale, std::move(dims));
}
KernelExpr KernelExpr::quad(double variance, double offset, std::vector<std::size_t> dims) {
  return base(BaseKind::quad, variance, offset, std::move(dims));
}

KernelExpr KernelExpr::sum(KernelExpr a, KernelExpr b) {
  auto n = std::make_shared<Node>();
  n->op = KernelOp::sum;
  n->n_params = a.node_->n_params + b.node_->n_params;
  n->n_leaves = a.node_->n_leaves + b.node_->n_leaves;
  n->depth = 1 + std::max(a.node_->depth, b.node_->depth);
  n->children = {std::move(a), std::move(b)};
  return KernelExpr(std::move(n));
}

KernelExpr KernelExpr::product(KernelExpr a, KernelExpr b) {
  KernelExpr s = sum(std::move(a), std::move(b));
  auto n = std::make_shared<Node>(*s.node_);
  n->op = KernelOp::product;
  return KernelExpr(std::move(n));
}

KernelOp KernelExpr::op() const noexcept { return node_->op; }

BaseKind KernelExpr::base_kind() const {
  if (node_->op != KernelOp::base) throw ConfigError("base_kind() on a composite kernel");
  return node_->kind;
}

const KernelExpr& KernelExpr::left() const {
  if (node_->op == KernelOp::base) throw ConfigError("left() on a base kernel");
  return node_->children[0];
}

const KernelExpr& KernelExpr::right() const {
  if (node_->op == KernelOp::base) throw ConfigError("right() on a base kernel");
  return node_->children[1];
}

double KernelExpr::variance() const {
  if (node_->op != KernelOp::base) throw ConfigError("variance() on a composite kernel");
  return node_->variance;
}

double KernelExpr::lengthscale() const {
  if (node_->op != KernelOp::base || node_->kind != BaseKind::rbf) {
    throw ConfigError("lengthscale() on a non-RBF kernel");
  }
  return node_->second;
}

double KernelExpr::offset() const {
  if (node_->op != KernelOp::base || node_->kind != BaseKind::quad) {
    throw ConfigError("offset() on a non-QUAD kernel");
  }
  return node_->second;
}

const std::vector<std::size_t>& KernelExpr::active_dims() const {
  if (node_->op != KernelOp::base) throw ConfigError("active_dims() on a composite kernel");
  return node_->dims;
}

std::size_t KernelExpr::num_params() const noexcept { return node_->n_params; }
std::size_t KernelExpr::leaf_count() const noexcept { return node_->n_leaves; }
std::size_t KernelExpr::depth() const noexcept { return node_->depth; }

bool KernelExpr::contains(BaseKind kind) const noexcept {
  if (node_->op == KernelOp::base) return node_->kind == kind;
  return left().contains(kind) || right().contains(kind);
}

namespace {

void collect_log_params(const KernelExpr& k, std::vector<double>& out) {
  if (k.op() == KernelOp::base) {
    out.push_back(std::log(k.variance()));
    if (k.base_kind() == BaseKind::rbf) out.push_back(std::log(k.lengthscale()));
    if (k.base_kind() == BaseKind::quad) out.push_back(std::log(k.offset()));
    return;
  }
  collect_log_params(k.left(), out);
  collect_log_params(k.right(), out);
}

KernelExpr rebuild_with(const KernelExpr& k, const Vector& rho, Index& pos) {
  if (k.op() == KernelOp::base) {
    const double var = std::exp(rho(pos++));
    double second = 1.0;
    if (k.base_kind() != BaseKind::lin) second = std::exp(rho(pos++));
    return KernelExpr::base(k.base_kind(), var, second, k.active_dims());
  }
  KernelExpr a = rebuild_with(k.left(), rho, pos);
  KernelExpr b = rebuild_with(k.right(), rho, pos);
  return k.op() == KernelOp::sum ? KernelExpr::sum(std::move(a), std::move(b))
                                 : KernelExpr::product(std::move(a), std::move(b));
}

std::string dims_text(const std::vector<std::size_t>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(dims[i]);
  }
  return s;
}

}  // namespace

Vector KernelExpr::log_params() const {
  std::vector<double> v;
  v.reserve(num_params());
  collect_log_params(*this, v);
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

KernelExpr KernelExpr::with_log_params(const Vector& rho) const {
  if (rho.size() != static_cast<Index>(num_params())) {
    throw NumericError("with_log_params: expected " + std::to_string(num_params()) + " values");
  }
  Index pos = 0;
  return rebuild_with(*this, rho, pos);
}

std::vector<std::string> KernelExpr::param_names() const {
  std::vector<std::string> names;
  std::size_t leaf = 0;
  std::function<void(const KernelExpr&)> walk = [&](const KernelExpr& k) {
    if (k.op() == KernelOp::base) {
      const std::string prefix = std::string(geoaug::to_string(k.base_kind())) + "#" + std::to_string(leaf++);
      names.push_back(prefix + ".var");
      if (k.base_kind() == BaseKind::rbf) names.push_back(prefix + ".sigma");
      if (k.base_kind() == BaseKind::quad) names.push_back(prefix + ".c");
      return;
    }
    walk(k.left());
    walk(k.right());
  };
  walk(*this);
  return names;
}

std::string KernelExpr::to_string() const {
  if (op() == KernelOp::base) {
    std::string s = geoaug::to_string(base_kind());
    s += "{var=" + format_double(variance());
    if (base_kind() == BaseKind::rbf) s += ",sigma=" + format_double(lengthscale());
    if (base_kind() == BaseKind::quad) s += ",c=" + format_double(offset());
    if (!active_dims().empty()) s += ",dims=" + dims_text(active_dims());
    s += "}";
    return s;
  }
  return std::string(op() == KernelOp::sum ? "SUM(" : "PROD(") + left().to_string() + ", " +
         right().to_string() + ")";
}

std::string KernelExpr::structure_key() const {
  if (op() == KernelOp::base) {
    std::string s = geoaug::to_string(base_kind());
    if (!active_dims().empty()) s += "[" + dims_text(active_dims()) + "]";
    return s;
  }
  std::string a = left().structure_key();
  std::string b = right().structure_key();
  if (b < a) std::swap(a, b);
  return std::string(op() == KernelOp::sum ? "SUM(" : "PROD(") + a + "," + b + ")";
}

bool KernelExpr::operator==(const KernelExpr& other) const {
  if (node_ == other.node_) return true;
  if (op() != other.op()) return false;
  if (op() == KernelOp::base) {
    return node_->kind == other.node_->kind && node_->variance == other.node_->variance &&
           node_->second == other.node_->second && node_->dims == other.node_->dims;
  }
  return left() == other.left() && right() == other.right();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  KernelExpr parse_all() {
    KernelExpr k = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return k;
  }

 private:
  KernelExpr parse_expr() {
    skip_ws();
    const std::string word = read_word();
    if (word == "SUM" || word == "PROD") {
      expect('(');
      KernelExpr a = parse_expr();
      expect(',');
      KernelExpr b = parse_expr();
      expect(')');
      return word == "SUM" ? KernelExpr::sum(std::move(a), std::move(b))
                           : KernelExpr::product(std::move(a), std::move(b));
    }
    BaseKind kind;
    if (word == "LIN") {
      kind = BaseKind::lin;
    } else if (word == "RBF") {
      kind = BaseKind::rbf;
    } else if (word == "QUAD") {
      kind = BaseKind::quad;
    } else {
      fail("unknown kernel '" + word + "'");
    }
    double var = 1.0;
    double second = 1.0;
    std::vector<std::size_t> dims;
    skip_ws();
    if (peek() == '{') {
      ++pos_;
      while (true) {
        skip_ws();
        if (peek() == '}') {
          ++pos_;
          break;
        }
        const std::string key = read_word();
        expect('=');
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}') ++pos_;
        const std::string_view value = trim(text_.substr(start, pos_ - start));
        try {
          if (key == "var") {
            var = parse_double(value, "var");
          } else if (key == "sigma" && kind == BaseKind::rbf) {
            second = parse_double(value, "sigma");
          } else if (key == "c" && kind == BaseKind::quad) {
            second = parse_double(value, "c");
          } else if (key == "dims") {
            for (const auto& d : split(value, ';')) {
              dims.push_back(static_cast<std::size_t>(parse_double(trim(d), "dims")));
            }
          } else {
            fail("unknown parameter '" + key + "' for " + word);
          }
        } catch (const DataError& e) {
          fail(e.what());
        }
        skip_ws();
        if (peek() == ',') ++pos_;
      }
    }
    return KernelExpr::base(kind, var, second, std::move(dims));
  }

  std::string read_word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("kernel parse error at offset " + std::to_string(pos_) + ": " + why);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

KernelExpr KernelExpr::parse(std::string_view text) { return Parser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

void check_dims(const std::vector<std::size_t>& dims, std::size_t d) {
  for (std::size_t j : dims) {
    if (j >= d) throw NumericError("kernel active dimension " + std::to_string(j) + " out of range");
  }
}

double eval_rec(const KernelExpr& k, std::span<const double> x, std::span<const double> x2) {
  if (k.op() != KernelOp::base) {
    const double a = eval_rec(k.left(), x, x2);
    const double b = eval_rec(k.right(), x, x2);
    return k.op() == KernelOp::sum ? a + b : a * b;
  }
  const auto& dims = k.active_dims();
  check_dims(dims, x.size());
  double dot = 0.0;
  double sq = 0.0;
  auto accumulate = [&](std::size_t j) {
    dot += x[j] * x2[j];
    const double diff = x[j] - x2[j];
    sq += diff * diff;
  };
  if (dims.empty()) {
    for (std::size_t j = 0; j < x.size(); ++j) accumulate(j);
  } else {
    for (std::size_t j : dims) accumulate(j);
  }
  switch (k.base_kind()) {
    case BaseKind::lin: return k.variance() * dot;
    case BaseKind::rbf: return k.variance() * std::exp(-sq / (2.0 * k.lengthscale() * k.lengthscale()));
    case BaseKind::quad: {
      const double t = dot + k.offset();
      return k.variance() * t * t;
    }
  }
  return 0.0;
}

}  // namespace

double eval_kernel(const KernelExpr& k, std::span<const double> x, std::span<const double> x2) {
  if (x.size() != x2.size()) throw NumericError("eval_kernel: dimension mismatch");
  return eval_rec(k, x, x2);
}

GramWorkspace::GramWorkspace(const Matrix& x) : x_(x), x2_(), symmetric_(true) {}

GramWorkspace::GramWorkspace(const Matrix& x, const Matrix& x2) : x_(x), x2_(x2), symmetric_(false) {
  if (x.cols() != x2.cols()) throw NumericError("gram: dimension mismatch");
}

GramWorkspace::Entry& GramWorkspace::entry(const std::vector<std::size_t>& dims) {
  auto it = cache_.find(dims);
  if (it != cache_.end()) return it->second;
  check_dims(dims, static_cast<std::size_t>(x_.cols()));

  std::vector<Index> cols;
  if (dims.empty()) {
    for (Index j = 0; j < x_.cols(); ++j) cols.push_back(j);
  } else {
    for (std::size_t j : dims) cols.push_back(static_cast<Index>(j));
  }
  const Matrix& b = symmetric_ ? x_ : x2_;
  // row-major copies so the inner loop is contiguous
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMat pa(x_.rows(), static_cast<Index>(cols.size()));
  RowMat pb(b.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    pa.col(static_cast<Index>(c)) = x_.col(cols[c]);
    pb.col(static_cast<Index>(c)) = b.col(cols[c]);
  }
  Entry e;
  e.dots = pa * pb.transpose();
  e.sqdist.resize(pa.rows(), pb.rows());
  const Index d = pa.cols();
  for (Index j = 0; j < pb.rows(); ++j) {
    const double* bj = pb.row(j).data();
    const Index i0 = symmetric_ ? j : 0;
    for (Index i = i0; i < pa.rows(); ++i) {
      const double* ai = pa.row(i).data();
      double s = 0.0;
      for (Index c = 0; c < d; ++c) {
        const double diff = ai[c] - bj[c];
        s += diff * diff;
      }
      e.sqdist(i, j) = s;
      if (symmetric_) e.sqdist(j, i) = s;
    }
  }
  if (symmetric_) {
    // exact symmetry regardless of GEMM summation order
    for (Index j = 0; j < e.dots.cols(); ++j) {
      for (Index i = j + 1; i < e.dots.rows(); ++i) e.dots(j, i) = e.dots(i, j);
    }
  }
  return cache_.emplace(dims, std::move(e)).first->second;
}

const Matrix& GramWorkspace::sqdist(const std::vector<std::size_t>& dims) { return entry(dims).sqdist; }
const Matrix& GramWorkspace::dots(const std::vector<std::size_t>& dims) { return entry(dims).dots; }

namespace {

void gram_rec(const KernelExpr& k, GramWorkspace& ws, bool want, Matrix& out, std::vector<Matrix>& grads) {
  if (k.op() == KernelOp::base) {
    const double v = k.variance();
    switch (k.base_kind()) {
      case BaseKind::lin:
        out = v * ws.dots(k.active_dims());
        if (want) grads.push_back(out);
        break;
      case BaseKind::rbf: {
        const double s2 = k.lengthscale() * k.lengthscale();
        const Matrix& sq = ws.sqdist(k.active_dims());
        out = v * (-sq.array() / (2.0 * s2)).exp();
        if (want) {
          grads.push_back(out);
          grads.push_back(out.cwiseProduct(sq) / s2);
        }
        break;
      }
      case BaseKind::quad: {
        const double c = k.offset();
        const Eigen::ArrayXXd t = ws.dots(k.active_dims()).array() + c;
        out = v * t.square();
        if (want) {
          grads.push_back(out);
          grads.push_back((2.0 * v * c) * t.matrix());
        }
        break;
      }
    }
    return;
  }
  Matrix a;
  Matrix b;
  std::vector<Matrix> ga;
  std::vector<Matrix> gb;
  gram_rec(k.left(), ws, want, a, ga);
  gram_rec(k.right(), ws, want, b, gb);
  if (k.op() == KernelOp::sum) {
    out = a + b;
    if (want) {
      for (auto& g : ga) grads.push_back(std::move(g));
      for (auto& g : gb) grads.push_back(std::move(g));
    }
  } else {
    out = a.cwiseProduct(b);
    if (want) {
      for (auto& g : ga) grads.push_back(g.cwiseProduct(b));
      for (auto& g : gb) grads.push_back(a.cwiseProduct(g));
    }
  }
}

}  // namespace

GramWithGrad gram_with_grad(const KernelExpr& k, GramWorkspace& ws, bool want_grads) {
  GramWithGrad r;
  r.grads.reserve(want_grads ? k.num_params() : 0);
  gram_rec(k, ws, want_grads, r.k, r.grads);
  return r;
}

Matrix gram(const KernelExpr& k, const Matrix& x, const Matrix& x2) {
  GramWorkspace ws(x, x2);
  return gram_with_grad(k, ws, false).k;
}

Matrix gram(const KernelExpr& k, const Matrix& x) {
  GramWorkspace ws(x);
  return gram_with_grad(k, ws, false).k;
}

std::vector<Matrix> gram_grad(const KernelExpr& k, const Matrix& x) {
  GramWorkspace ws(x);
  return gram_with_grad(k, ws, true).grads;
}

// ---------------------------------------------------------------------------
// Grammar

namespace {

std::size_t subexpression_count(const KernelExpr& k) {
  if (k.op() == KernelOp::base) return 1;
  return 1 + subexpression_count(k.left()) + subexpression_count(k.right());
}

/// Rebuilds k with the pre-order subexpression number `target` replaced by
/// fn(subexpression).
KernelExpr replace_at(const KernelExpr& k, std::size_t target, std::size_t& counter,
                      const std::function<KernelExpr(const KernelExpr&)>& fn) {
  const std::size_t here = counter++;
  if (here == target) {
    counter += subexpression_count(k) - 1;
    return fn(k);
  }
  if (k.op() == KernelOp::base) return k;
  KernelExpr a = replace_at(k.left(), target, counter, fn);
  KernelExpr b = replace_at(k.right(), target, counter, fn);
  return k.op() == KernelOp::sum ? KernelExpr::sum(std::move(a), std::move(b))
                                 : KernelExpr::product(std::move(a), std::move(b));
}

KernelExpr fresh_base(BaseKind kind, double variance, const BaseInit& init) {
  const double second = kind == BaseKind::rbf ? init.lengthscale : init.offset;
  return KernelExpr::base(kind, variance, second);
}

}  // namespace

std::vector<KernelExpr> expand_grammar(const KernelExpr& k, std::span<const BaseKind> bases,
                                       std::size_t max_leaves, const BaseInit& init) {
  std::vector<KernelExpr> out;
  std::set<std::string> seen;
  auto add = [&](KernelExpr e) {
    if (seen.insert(e.structure_key()).second) out.push_back(std::move(e));
  };

  const std::size_t n_sub = subexpression_count(k);
  if (k.leaf_count() < max_leaves) {
    for (std::size_t s = 0; s < n_sub; ++s) {
      for (BaseKind b : bases) {
        std::size_t c = 0;
        add(replace_at(k, s, c, [&](const KernelExpr& sub) {
          return KernelExpr::sum(sub, fresh_base(b, init.variance, init));
        }));
      }
      for (BaseKind b : bases) {
        std::size_t c = 0;
        add(replace_at(k, s, c, [&](const KernelExpr& sub) {
          return KernelExpr::product(sub, fresh_base(b, 1.0, init));
        }));
      }
    }
  }
  for (std::size_t s = 0; s < n_sub; ++s) {
    for (BaseKind b : bases) {
      std::size_t c = 0;
      bool swapped = false;
      KernelExpr e = replace_at(k, s, c, [&](const KernelExpr& sub) {
        if (sub.op() != KernelOp::base || sub.base_kind() == b) return sub;
        swapped = true;
        return fresh_base(b, sub.variance(), init);
      });
      if (swapped) add(std::move(e));
    }
  }
  return out;
}

ModelScore bic(double log_likelihood, std::size_t k_params, std::size_t n_obs) {
  if (n_obs < 1) throw NumericError("bic: need at least one observation");
  ModelScore s;
  s.log_likelihood = log_likelihood;
  s.k_params = k_params;
  s.n_obs = n_obs;
  s.bic = static_cast<double>(k_params) * std::log(static_cast<double>(n_obs)) - 2.0 * log_likelihood;
  return s;
}

}  // namespace geoaug
