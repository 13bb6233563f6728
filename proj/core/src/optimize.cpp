#include "geoaug/optimize.hpp"

#include <cmath>
#include <deque>

#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

struct Pair {
  Vector s;
  Vector y;
  double rho;
};

/// Two-loop recursion for the ascent direction H * g.
Vector lbfgs_direction(const std::deque<Pair>& mem, const Vector& g) {
  Vector q = g;
  std::vector<double> alpha(mem.size());
  for (std::size_t i = mem.size(); i-- > 0;) {
    alpha[i] = mem[i].rho * mem[i].s.dot(q);
    q -= alpha[i] * mem[i].y;
  }
  if (!mem.empty()) {
    const auto& last = mem.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double beta = mem[i].rho * mem[i].y.dot(q);
    q += (alpha[i] - beta) * mem[i].s;
  }
  return q;
}

}  // namespace

MaximizeResult maximize(const Objective& f, Vector x0, const MaximizeOptions& opts) {
  MaximizeResult r;
  r.x = std::move(x0);
  auto first = f(r.x);
  r.evaluations = 1;
  if (!first || !std::isfinite(first->value) || !first->gradient.allFinite()) {
    throw NumericError("optimizer: objective undefined at the starting point");
  }
  r.value = first->value;
  r.gradient = std::move(first->gradient);

  // Work on the ascent problem directly: y = g_old - g_new keeps the usual
  // positive-curvature convention for a concave objective.
  std::deque<Pair> mem;
  constexpr double kArmijo = 1e-4;

  for (r.iterations = 0; r.iterations < opts.max_iters; ++r.iterations) {
    if (r.gradient.cwiseAbs().maxCoeff() < opts.grad_tol) {
      r.converged = true;
      break;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Vector d = mem.empty() ? Vector(r.gradient) : lbfgs_direction(mem, r.gradient);
      double slope = d.dot(r.gradient);
      if (!(slope > 0.0) || !d.allFinite()) {
        mem.clear();
        d = r.gradient;
        slope = d.squaredNorm();
      }
      double t = 1.0;
      if (mem.empty()) t = 1.0 / std::max(1.0, d.cwiseAbs().maxCoeff());
      const double biggest = t * d.cwiseAbs().maxCoeff();
      if (biggest > opts.max_step) t *= opts.max_step / biggest;

      for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
        Vector x_new = r.x + t * d;
        auto v = f(x_new);
        ++r.evaluations;
        if (!v || !std::isfinite(v->value) || !v->gradient.allFinite()) continue;
        if (v->value < r.value + kArmijo * t * slope) continue;

        Pair p{x_new - r.x, r.gradient - v->gradient, 0.0};
        const double sy = p.s.dot(p.y);
        if (sy > 1e-12 * p.s.norm() * p.y.norm() && sy > 0.0) {
          p.rho = 1.0 / sy;
          mem.push_back(std::move(p));
          if (static_cast<int>(mem.size()) > opts.history) mem.pop_front();
        }
        const double gain = v->value - r.value;
        r.x = std::move(x_new);
        r.value = v->value;
        r.gradient = std::move(v->gradient);
        accepted = true;
        if (gain <= opts.rel_value_tol * std::max(1.0, std::abs(r.value))) {
          r.converged = true;
          ++r.iterations;
          return r;
        }
        break;
      }
      if (!accepted) {
        if (mem.empty()) break;
        mem.clear();
      }
    }
    if (!accepted) {
      // no ascent step found along the gradient: a stationary point to
      // working precision
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace geoaug
