#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoaug/numcore.hpp"

namespace geoaug {

enum class BaseKind : std::uint8_t { lin, rbf, quad };
enum class KernelOp : std::uint8_t { base, sum, product };

const char* to_string(BaseKind k) noexcept;

/// Immutable covariance-function expression over LIN, RBF and QUAD leaves.
///
/// Every leaf carries a variance scale; RBF adds a lengthscale, QUAD an
/// offset. All hyperparameters are positive and exposed in log space, in
/// pre-order (left to right over leaves; variance before the second
/// parameter). A leaf may restrict itself to a subset of input dimensions.
class KernelExpr {
 public:
  static KernelExpr lin(double variance = 1.0, std::vector<std::size_t> dims = {});
  static KernelExpr rbf(double variance = 1.0, double lengthscale = 1.0, std::vector<std::size_t> dims = {});
  static KernelExpr quad(double variance = 1.0, double offset = 1.0, std::vector<std::size_t> dims = {});
  static KernelExpr base(BaseKind kind, double variance, double second = 1.0, std::vector<std::size_t> dims = {});
  static KernelExpr sum(KernelExpr a, KernelExpr b);
  static KernelExpr product(KernelExpr a, KernelExpr b);

  /// Parses the text form produced by to_string, e.g.
  /// `SUM(LIN{var=1}, PROD(RBF{var=2,sigma=0.42}, QUAD{var=1,c=1}))`.
  /// Missing parameters default to 1. Throws ConfigError on bad input.
  static KernelExpr parse(std::string_view text);

  KernelOp op() const noexcept;
  BaseKind base_kind() const;
  const KernelExpr& left() const;
  const KernelExpr& right() const;

  double variance() const;
  double lengthscale() const;
  double offset() const;
  const std::vector<std::size_t>& active_dims() const;

  std::size_t num_params() const noexcept;
  Vector log_params() const;
  KernelExpr with_log_params(const Vector& rho) const;
  std::vector<std::string> param_names() const;

  std::size_t leaf_count() const noexcept;
  std::size_t depth() const noexcept;
  bool contains(BaseKind kind) const noexcept;

  std::string to_string() const;
  /// Structure-only key, identical for trees equal up to commutativity of
  /// SUM and PROD. Hyperparameter values are ignored.
  std::string structure_key() const;

  bool operator==(const KernelExpr& other) const;

 private:
  struct Node;
  explicit KernelExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// k(x, x2). Throws NumericError on dimension mismatch or an active
/// dimension outside the input.
double eval_kernel(const KernelExpr& k, std::span<const double> x, std::span<const double> x2);

/// Cached pairwise squared distances and dot products (per active-dimension
/// set) for one or two point sets stored as matrix rows.
class GramWorkspace {
 public:
  explicit GramWorkspace(const Matrix& x);
  GramWorkspace(const Matrix& x, const Matrix& x2);

  bool symmetric() const noexcept { return symmetric_; }
  Index rows() const noexcept { return x_.rows(); }
  Index cols() const noexcept { return x2_.rows(); }
  Index dim() const noexcept { return x_.cols(); }

  const Matrix& sqdist(const std::vector<std::size_t>& dims);
  const Matrix& dots(const std::vector<std::size_t>& dims);

 private:
  struct Entry {
    Matrix sqdist;
    Matrix dots;
  };
  Entry& entry(const std::vector<std::size_t>& dims);

  Matrix x_;
  Matrix x2_;
  bool symmetric_;
  std::map<std::vector<std::size_t>, Entry> cache_;
};

struct GramWithGrad {
  Matrix k;
  /// dK/d(log theta), one per hyperparameter in traversal order.
  std::vector<Matrix> grads;
};

GramWithGrad gram_with_grad(const KernelExpr& k, GramWorkspace& ws, bool want_grads = true);

/// Rows of x against rows of x2.
Matrix gram(const KernelExpr& k, const Matrix& x, const Matrix& x2);
Matrix gram(const KernelExpr& k, const Matrix& x);
std::vector<Matrix> gram_grad(const KernelExpr& k, const Matrix& x);

/// Hyperparameters given to leaves introduced by grammar expansion.
struct BaseInit {
  double variance = 1.0;
  double lengthscale = 1.0;
  double offset = 1.0;
};

/// One-step neighbours under S -> S+B, S -> S*B (at every subexpression S,
/// only while leaf_count < max_leaves) and B -> B' (at every leaf),
/// deduplicated up to commutativity, in generation order. New sum leaves
/// take init.variance; new product leaves take variance 1 so the product
/// keeps the scale of S; swapped leaves keep the replaced leaf's variance.
std::vector<KernelExpr> expand_grammar(const KernelExpr& k, std::span<const BaseKind> bases,
                                       std::size_t max_leaves, const BaseInit& init = {});

struct ModelScore {
  double bic = 0.0;
  double log_likelihood = 0.0;
  std::size_t k_params = 0;
  std::size_t n_obs = 0;
};

/// k ln n - 2 log L; lower is better.
ModelScore bic(double log_likelihood, std::size_t k_params, std::size_t n_obs);

}  // namespace geoaug
