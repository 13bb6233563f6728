#include <gtest/gtest.h>

#include <cmath>

#include "geoaug/errors.hpp"
#include "geoaug/optimize.hpp"

using namespace geoaug;

TEST(Maximize, ConcaveQuadratic) {
  Matrix a(3, 3);
  a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  Vector b(3);
  b << 1, -2, 0.5;
  const Objective f = [&](const Vector& x) -> std::optional<ObjectiveValue> {
    return ObjectiveValue{-0.5 * x.dot(a * x) + b.dot(x), -(a * x) + b};
  };
  const MaximizeResult r = maximize(f, Vector::Zero(3));
  EXPECT_TRUE(r.converged);
  const Vector expected = a.ldlt().solve(b);
  EXPECT_LT((r.x - expected).norm(), 1e-5);
}

TEST(Maximize, NegatedRosenbrock) {
  const Objective f = [](const Vector& x) -> std::optional<ObjectiveValue> {
    const double u = 1.0 - x(0), v = x(1) - x(0) * x(0);
    Vector g(2);
    g << 2.0 * u + 400.0 * x(0) * v, -200.0 * v;
    return ObjectiveValue{-(u * u + 100.0 * v * v), g};
  };
  MaximizeOptions opts;
  opts.max_iters = 2000;
  opts.max_step = 0.5;
  const MaximizeResult r = maximize(f, Vector::Constant(2, -1.0), opts);
  EXPECT_NEAR(r.x(0), 1.0, 1e-3);
  EXPECT_NEAR(r.x(1), 1.0, 2e-3);
}

TEST(Maximize, BacksOffFromUndefinedRegion) {
  // log(x) - x, undefined for x <= 0, maximum at 1.
  const Objective f = [](const Vector& x) -> std::optional<ObjectiveValue> {
    if (x(0) <= 0.0) return std::nullopt;
    return ObjectiveValue{std::log(x(0)) - x(0), Vector::Constant(1, 1.0 / x(0) - 1.0)};
  };
  const MaximizeResult r = maximize(f, Vector::Constant(1, 0.05));
  EXPECT_NEAR(r.x(0), 1.0, 1e-5);
  EXPECT_THROW(maximize(f, Vector::Constant(1, -1.0)), NumericError);
}

TEST(Maximize, RespectsIterationCap) {
  const Objective f = [](const Vector& x) -> std::optional<ObjectiveValue> {
    return ObjectiveValue{-x.squaredNorm() * x.squaredNorm(), -4.0 * x.squaredNorm() * x};
  };
  MaximizeOptions opts;
  opts.max_iters = 2;
  const MaximizeResult r = maximize(f, Vector::Constant(4, 3.0), opts);
  EXPECT_LE(r.iterations, 2);
  EXPECT_GE(r.value, -std::pow(36.0, 2.0));
}
