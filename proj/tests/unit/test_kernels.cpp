#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "geoaug/errors.hpp"
#include "geoaug/kernels.hpp"
#include "oracles.hpp"

using namespace geoaug;

namespace {

double eval2(const KernelExpr& k, std::vector<double> a, std::vector<double> b) { return eval_kernel(k, a, b); }

/// Random tree with up to `leaves` leaves and log-uniform hyperparameters.
KernelExpr random_kernel(std::mt19937_64& rng, int leaves) {
  std::uniform_real_distribution<double> lu(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  if (leaves <= 1) {
    const auto kind = static_cast<BaseKind>(pick(rng));
    return KernelExpr::base(kind, std::exp(lu(rng)), std::exp(lu(rng)));
  }
  std::uniform_int_distribution<int> split(1, leaves - 1);
  const int l = split(rng);
  KernelExpr a = random_kernel(rng, l), b = random_kernel(rng, leaves - l);
  return pick(rng) % 2 ? KernelExpr::sum(a, b) : KernelExpr::product(a, b);
}

}  // namespace

TEST(EvalKernel, ClosedFormExamples) {
  EXPECT_NEAR(eval2(KernelExpr::lin(1.0), {1, 2}, {3, 4}), 11.0, 1e-12);
  EXPECT_NEAR(eval2(KernelExpr::rbf(1.0, 1.0), {0.3, -2}, {0.3, -2}), 1.0, 1e-12);
  EXPECT_NEAR(eval2(KernelExpr::rbf(1.0, 1.0), {0, 0}, {1, 1}), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(eval2(KernelExpr::quad(1.0, 1.0), {1}, {2}), 9.0, 1e-12);
}

TEST(EvalKernel, VarianceAndCompositionArePointwise) {
  const auto l = KernelExpr::lin(2.5), r = KernelExpr::rbf(0.7, 0.3), q = KernelExpr::quad(1.5, 0.2);
  const std::vector<double> a{0.1, 0.4}, b{-0.3, 0.9};
  EXPECT_NEAR(eval_kernel(l, a, b), 2.5 * (0.1 * -0.3 + 0.4 * 0.9), 1e-15);
  EXPECT_NEAR(eval_kernel(KernelExpr::sum(l, r), a, b), eval_kernel(l, a, b) + eval_kernel(r, a, b), 1e-15);
  EXPECT_NEAR(eval_kernel(KernelExpr::product(r, q), a, b), eval_kernel(r, a, b) * eval_kernel(q, a, b), 1e-15);
}

TEST(EvalKernel, DimensionMismatchAndActiveDims) {
  EXPECT_THROW(eval2(KernelExpr::lin(), {1, 2}, {1}), NumericError);
  EXPECT_THROW(eval2(KernelExpr::lin(1.0, {3}), {1, 2}, {1, 2}), NumericError);
  EXPECT_NEAR(eval2(KernelExpr::lin(1.0, {1}), {1, 2}, {3, 4}), 8.0, 1e-15);
}

TEST(Gram, SinglePointAndTwoPointLin) {
  Matrix one(1, 2);
  one << 0.4, -0.1;
  EXPECT_NEAR(gram(KernelExpr::rbf(), one)(0, 0), 1.0, 1e-15);
  Matrix two(2, 2);
  two << 1, 2, 3, 4;
  const Matrix g = gram(KernelExpr::lin(), two);
  EXPECT_EQ(g(0, 0), 5.0);
  EXPECT_EQ(g(0, 1), 11.0);
  EXPECT_EQ(g(1, 0), 11.0);
  EXPECT_EQ(g(1, 1), 25.0);
}

TEST(Gram, MatchesPointwiseEvaluationAndComposes) {
  std::mt19937_64 rng(8);
  const Matrix x = oracle::random_points(rng, 10, 3);
  const Matrix x2 = oracle::random_points(rng, 4, 3);
  const auto l = KernelExpr::lin(1.3), r = KernelExpr::rbf(0.8, 0.6);
  const Matrix gs = gram(KernelExpr::sum(l, r), x);
  const Matrix gl = gram(l, x), gr = gram(r, x);
  for (Index i = 0; i < 10; ++i)
    for (Index j = 0; j < 10; ++j) EXPECT_EQ(gs(i, j), gl(i, j) + gr(i, j));
  const Matrix cross = gram(KernelExpr::product(l, r), x, x2);
  for (Index i = 0; i < 10; ++i) {
    for (Index j = 0; j < 4; ++j) {
      const Vector xi = x.row(i).transpose(), xj = x2.row(j).transpose();
      const double ref = eval_kernel(KernelExpr::product(l, r), {xi.data(), 3}, {xj.data(), 3});
      EXPECT_NEAR(cross(i, j), ref, 1e-14);
    }
  }
  EXPECT_THROW(gram(l, x, oracle::random_points(rng, 2, 2)), NumericError);
}

TEST(Gram, PsdForRandomKernelsAndPoints) {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> nleaves(1, 4), npts(2, 20), ndim(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const KernelExpr k = random_kernel(rng, nleaves(rng));
    const Matrix x = oracle::random_points(rng, npts(rng), ndim(rng));
    const Matrix g = gram(k, x);
    EXPECT_LT((g - g.transpose()).norm(), 1e-12 * (1.0 + g.norm()));
    const auto ev = oracle::jacobi_eigenvalues(g);
    EXPECT_GE(ev.front(), -1e-8 * g.trace()) << k.to_string();
  }
}

TEST(GramGrad, RbfLengthscaleGradientVanishesOnDiagonal) {
  Matrix x(2, 1);
  x << 0.0, 1.0;
  const auto grads = gram_grad(KernelExpr::rbf(1.0, 1.0), x);
  ASSERT_EQ(grads.size(), 2u);
  EXPECT_EQ(grads[1](0, 0), 0.0);
  EXPECT_EQ(grads[1](1, 1), 0.0);
  EXPECT_NEAR(grads[1](0, 1), std::exp(-0.5), 1e-15);  // d/drho exp(-d^2/(2 s^2)) = d^2/s^2 k
}

TEST(GramGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const KernelExpr k = random_kernel(rng, 1 + trial % 4);
    const Matrix x = oracle::random_points(rng, 6, 2);
    const auto grads = gram_grad(k, x);
    const Vector rho = k.log_params();
    ASSERT_EQ(grads.size(), static_cast<std::size_t>(rho.size()));
    for (Index p = 0; p < rho.size(); ++p) {
      const double h = 1e-5;
      Vector rp = rho, rm = rho;
      rp(p) += h;
      rm(p) -= h;
      const Matrix fd = (gram(k.with_log_params(rp), x) - gram(k.with_log_params(rm), x)) / (2.0 * h);
      const Matrix& an = grads[static_cast<std::size_t>(p)];
      EXPECT_LE((fd - an).norm(), 1e-5 * std::max(1e-3, an.norm())) << k.to_string() << " param " << p;
    }
  }
}

TEST(GramGrad, SumGradientConcatenatesChildren) {
  std::mt19937_64 rng(2);
  const Matrix x = oracle::random_points(rng, 5, 2);
  const auto a = KernelExpr::rbf(1.2, 0.4), b = KernelExpr::quad(0.5, 2.0);
  const auto gs = gram_grad(KernelExpr::sum(a, b), x);
  const auto ga = gram_grad(a, x), gb = gram_grad(b, x);
  ASSERT_EQ(gs.size(), 4u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(gs[i], ga[i]);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(gs[2 + i], gb[i]);
}

TEST(KernelExpr, ParameterOrderAndRoundTrip) {
  const auto k = KernelExpr::sum(KernelExpr::lin(2.0), KernelExpr::product(KernelExpr::rbf(3.0, 0.42),
                                                                          KernelExpr::quad(1.0, 0.5, {0, 2})));
  EXPECT_EQ(k.num_params(), 5u);
  EXPECT_EQ(k.leaf_count(), 3u);
  const Vector rho = k.log_params();
  EXPECT_NEAR(rho(0), std::log(2.0), 1e-15);
  EXPECT_NEAR(rho(2), std::log(0.42), 1e-15);
  EXPECT_NEAR(rho(4), std::log(0.5), 1e-15);
  const KernelExpr back = KernelExpr::parse(k.to_string());
  EXPECT_EQ(back, k);
  EXPECT_EQ(back.right().right().active_dims(), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(KernelExpr::parse("SUM(LIN, PROD(RBF{sigma=0.42}, QUAD{c=1.0}))").num_params(), 5u);
  EXPECT_THROW(KernelExpr::parse("SUM(LIN"), ConfigError);
  EXPECT_THROW(KernelExpr::parse("MATERN"), ConfigError);
  EXPECT_THROW(KernelExpr::rbf(1.0, -1.0), ConfigError);
}

TEST(KernelExpr, StructureKeyIgnoresOrderAndValues) {
  const auto a = KernelExpr::sum(KernelExpr::lin(2.0), KernelExpr::rbf(1.0, 0.3));
  const auto b = KernelExpr::sum(KernelExpr::rbf(5.0, 0.1), KernelExpr::lin());
  EXPECT_EQ(a.structure_key(), b.structure_key());
  EXPECT_NE(a.structure_key(), KernelExpr::product(KernelExpr::lin(), KernelExpr::rbf()).structure_key());
}

namespace {

/// Independent enumeration: every tree reachable in one step, keyed by
/// canonical structure, built from a hand-written list for a single leaf.
std::set<std::string> brute_force_from_single(BaseKind start) {
  const BaseKind all[] = {BaseKind::lin, BaseKind::rbf, BaseKind::quad};
  std::set<std::string> keys;
  const auto leaf = [](BaseKind b) { return KernelExpr::base(b, 1.0); };
  for (BaseKind b : all) {
    keys.insert(KernelExpr::sum(leaf(start), leaf(b)).structure_key());
    keys.insert(KernelExpr::product(leaf(start), leaf(b)).structure_key());
    if (b != start) keys.insert(leaf(b).structure_key());
  }
  return keys;
}

}  // namespace

TEST(ExpandGrammar, SingleLinGivesEightCandidates) {
  const BaseKind bases[] = {BaseKind::lin, BaseKind::rbf, BaseKind::quad};
  const auto children = expand_grammar(KernelExpr::lin(), bases, 3);
  EXPECT_EQ(children.size(), 8u);
  std::set<std::string> keys;
  for (const auto& c : children) keys.insert(c.structure_key());
  EXPECT_EQ(keys, brute_force_from_single(BaseKind::lin));
}

TEST(ExpandGrammar, CapAllowsOnlySwaps) {
  const BaseKind bases[] = {BaseKind::lin, BaseKind::rbf, BaseKind::quad};
  const auto k = KernelExpr::sum(KernelExpr::lin(), KernelExpr::rbf());
  for (const auto& c : expand_grammar(k, bases, 2)) EXPECT_EQ(c.leaf_count(), 2u) << c.to_string();
  for (const auto& c : expand_grammar(KernelExpr::rbf(), bases, 1)) EXPECT_EQ(c.leaf_count(), 1u);
}

TEST(ExpandGrammar, NoDuplicatesUpToCommutativity) {
  const BaseKind bases[] = {BaseKind::lin, BaseKind::rbf, BaseKind::quad};
  const auto k = KernelExpr::sum(KernelExpr::lin(), KernelExpr::rbf());
  const auto children = expand_grammar(k, bases, 3);
  std::set<std::string> keys;
  for (const auto& c : children) EXPECT_TRUE(keys.insert(c.structure_key()).second) << c.to_string();
  EXPECT_EQ(keys.count(k.structure_key()), 0u);
}

TEST(Bic, ClosedForm) {
  EXPECT_NEAR(bic(0.0, 2, static_cast<std::size_t>(std::round(std::exp(2.0)))).bic,
              2.0 * std::log(std::round(std::exp(2.0))), 1e-12);
  EXPECT_EQ(bic(-3.5, 0, 10).bic, 7.0);
  const ModelScore s = bic(-10.0, 3, 100);
  EXPECT_NEAR(s.bic, 3.0 * std::log(100.0) + 20.0, 1e-12);
  EXPECT_EQ(s.k_params, 3u);
}
