#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "geoaug/kernel_search.hpp"
#include "oracles.hpp"

using namespace geoaug;

namespace {

Vector draw(std::mt19937_64& rng, const KernelExpr& k, const Matrix& x, double noise) {
  Matrix c = gram(k, x);
  c.diagonal().array() += noise;
  const Eigen::LLT<Matrix> llt(c);
  std::normal_distribution<double> z(0.0, 1.0);
  Vector e(x.rows());
  for (Index i = 0; i < e.size(); ++i) e(i) = z(rng);
  return llt.matrixL() * e;
}

SearchConfig quick(std::size_t depth) {
  SearchConfig cfg;
  cfg.max_depth = depth;
  cfg.fit.max_iters = 150;
  cfg.fit.restarts = 1;
  return cfg;
}

}  // namespace

TEST(ScoreModel, CountsNoiseAsParameter) {
  std::mt19937_64 rng(1);
  const Matrix x = oracle::random_points(rng, 100, 2);
  const Vector y = draw(rng, KernelExpr::rbf(1.0, 0.5), x, 0.05);
  const GPModel m = fit_gp(KernelExpr::rbf(), x, y, quick(1).fit);
  const ModelScore s = score_model(m);
  EXPECT_EQ(s.k_params, 3u);
  EXPECT_EQ(s.n_obs, 100u);
  const double ll = m.log_marginal_likelihood().value;
  EXPECT_NEAR(s.log_likelihood, ll, 1e-9);
  EXPECT_NEAR(s.bic, 3.0 * std::log(100.0) - 2.0 * ll, 1e-9);
}

TEST(SearchKernel, DepthOneReturnsBestBase) {
  std::mt19937_64 rng(2);
  const Matrix x = oracle::random_points(rng, 40, 2);
  const Vector y = draw(rng, KernelExpr::rbf(1.0, 0.4), x, 0.01);
  const SearchResult r = search_kernel(x, y, quick(1));
  EXPECT_EQ(r.kernel().leaf_count(), 1u);
  ASSERT_EQ(r.trace.size(), 3u);
  double best = r.trace[0].score.bic;
  for (const auto& s : r.trace) best = std::min(best, s.score.bic);
  EXPECT_EQ(r.score.bic, best);
}

TEST(SearchKernel, TraceBicIsNonIncreasingOverAcceptedSteps) {
  std::mt19937_64 rng(3);
  const Matrix x = oracle::random_points(rng, 50, 2);
  const Vector y = draw(rng, KernelExpr::sum(KernelExpr::lin(0.5), KernelExpr::rbf(1.0, 0.3)), x, 0.01);
  const SearchResult r = search_kernel(x, y, quick(3));
  double last = std::numeric_limits<double>::infinity();
  std::size_t accepted = 0;
  for (const auto& s : r.trace) {
    if (!s.accepted) continue;
    ++accepted;
    EXPECT_LE(s.score.bic, last);
    last = s.score.bic;
  }
  EXPECT_GE(accepted, 1u);
  EXPECT_EQ(r.score.bic, last);
  EXPECT_LE(r.kernel().leaf_count(), 3u);
  EXPECT_TRUE(r.trace_json().is_array());
}

TEST(SearchKernel, RecoversLinearStructure) {
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(50 + seed);
    const Matrix x = oracle::random_points(rng, 60, 2);
    const Vector y = draw(rng, KernelExpr::lin(2.0), x, 0.01);
    SearchConfig cfg = quick(2);
    cfg.fit.seed = seed;
    const SearchResult r = search_kernel(x, y, cfg);
    const GPModel rbf_only = fit_gp(KernelExpr::rbf(), x, y, cfg.fit);
    if (r.kernel().contains(BaseKind::lin) && r.score.bic <= score_model(rbf_only).bic) ++successes;
  }
  EXPECT_GE(successes, 8);
}

TEST(SearchKernel, ConstantTargetsDoNotCrash) {
  std::mt19937_64 rng(4);
  const Matrix x = oracle::random_points(rng, 12, 2);
  const SearchResult r = search_kernel(x, Vector::Zero(12), quick(2));
  EXPECT_TRUE(std::isfinite(r.score.bic));
}

TEST(SearchKernel, ConcurrentCandidatesMatchSequential) {
  std::mt19937_64 rng(5);
  const Matrix x = oracle::random_points(rng, 30, 2);
  const Vector y = draw(rng, KernelExpr::rbf(1.0, 0.5), x, 0.05);
  SearchConfig a = quick(2), b = quick(2);
  b.jobs = 3;
  const SearchResult ra = search_kernel(x, y, a), rb = search_kernel(x, y, b);
  EXPECT_EQ(ra.kernel(), rb.kernel());
  EXPECT_EQ(ra.score.bic, rb.score.bic);
  ASSERT_EQ(ra.trace.size(), rb.trace.size());
}
