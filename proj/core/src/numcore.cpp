#include "geoaug/numcore.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "geoaug/errors.hpp"

namespace geoaug {

Vector CholeskyFactor::solve(const Vector& b) const {
  Vector x = lower_.triangularView<Eigen::Lower>().solve(b);
  lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix CholeskyFactor::solve(const Matrix& b) const {
  Matrix x = lower_.triangularView<Eigen::Lower>().solve(b);
  lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix CholeskyFactor::solve_lower(const Matrix& b) const {
  return lower_.triangularView<Eigen::Lower>().solve(b);
}

Matrix CholeskyFactor::inverse() const {
  return solve(Matrix(Matrix::Identity(size(), size())));
}

double CholeskyFactor::log_det() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = j + 1; i < a.rows(); ++i) {
      if (std::abs(a(i, j) - a(j, i)) > rel_tol * scale) return false;
    }
  }
  return true;
}

CholeskyFactor cholesky(const Matrix& a, const JitterSchedule& schedule) {
  if (a.rows() != a.cols()) throw NumericError("cholesky: matrix is not square");
  if (a.size() == 0) return CholeskyFactor(Matrix(0, 0), 0.0);
  if (!a.allFinite()) throw NumericError("cholesky: matrix has non-finite entries");
  if (!is_symmetric(a)) throw NumericError("cholesky: matrix is not symmetric");

  const double n = static_cast<double>(a.rows());
  double scale = a.trace() / n;
  if (!(scale > 0.0)) scale = 1.0;

  Matrix shifted = a;
  for (double m : schedule.multipliers) {
    const double jitter = m * scale;
    shifted.diagonal() = a.diagonal().array() + jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Matrix lower = llt.matrixL();
    const auto diag = lower.diagonal().array();
    if (!(diag > 0.0).all() || !diag.allFinite()) continue;
    return CholeskyFactor(std::move(lower), jitter);
  }
  std::ostringstream msg;
  msg << "cholesky: matrix of size " << a.rows() << " is not positive definite after jitter "
      << (schedule.multipliers.empty() ? 0.0 : schedule.multipliers.back() * scale);
  throw NumericError(msg.str());
}

Vector solve_spd(const Matrix& a, const Vector& b, const JitterSchedule& schedule) {
  if (a.rows() != b.rows()) throw NumericError("solve_spd: dimension mismatch");
  return cholesky(a, schedule).solve(b);
}

Matrix solve_spd(const Matrix& a, const Matrix& b, const JitterSchedule& schedule) {
  if (a.rows() != b.rows()) throw NumericError("solve_spd: dimension mismatch");
  return cholesky(a, schedule).solve(b);
}

LuFactor::LuFactor(Matrix a) : lu_(std::move(a)) {
  const Index n = lu_.rows();
  if (lu_.cols() != n) throw NumericError("lu: matrix is not square");
  if (!lu_.allFinite()) throw NumericError("lu: matrix has non-finite entries");
  pivots_.resize(static_cast<std::size_t>(n));

  const double scale = n > 0 ? lu_.cwiseAbs().maxCoeff() : 0.0;
  const double tiny = std::numeric_limits<double>::epsilon() * static_cast<double>(n) * scale;

  for (Index k = 0; k < n; ++k) {
    Index p = k;
    double best = std::abs(lu_(k, k));
    for (Index i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        p = i;
      }
    }
    if (best <= tiny || best == 0.0) {
      std::ostringstream msg;
      msg << "lu: matrix is singular to working precision (pivot column " << k << ")";
      throw NumericError(msg.str());
    }
    pivots_[static_cast<std::size_t>(k)] = p;
    if (p != k) lu_.row(p).swap(lu_.row(k));

    const double pivot = lu_(k, k);
    for (Index i = k + 1; i < n; ++i) {
      const double factor = lu_(i, k) / pivot;
      lu_(i, k) = factor;
      if (factor == 0.0) continue;
      for (Index j = k + 1; j < n; ++j) lu_(i, j) -= factor * lu_(k, j);
    }
  }
}

Vector LuFactor::solve(const Vector& b) const {
  const Index n = lu_.rows();
  if (b.size() != n) throw NumericError("lu: dimension mismatch");
  Vector x = b;
  for (Index k = 0; k < n; ++k) {
    const Index p = pivots_[static_cast<std::size_t>(k)];
    if (p != k) std::swap(x(k), x(p));
  }
  // forward substitution with the unit lower factor
  for (Index i = 1; i < n; ++i) {
    double s = x(i);
    for (Index j = 0; j < i; ++j) s -= lu_(i, j) * x(j);
    x(i) = s;
  }
  for (Index i = n - 1; i >= 0; --i) {
    double s = x(i);
    for (Index j = i + 1; j < n; ++j) s -= lu_(i, j) * x(j);
    x(i) = s / lu_(i, i);
  }
  return x;
}

Vector solve_general(const Matrix& a, const Vector& b) {
  return LuFactor(a).solve(b);
}

double norm_inf(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace geoaug
