#pragma once

// Dense linear algebra shared by the GP and kriging code paths.

#include <Eigen/Dense>

#include <vector>

namespace geoaug {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Diagonal jitter multipliers tried in order; each is scaled by trace(A)/n.
struct JitterSchedule {
  std::vector<double> multipliers{0.0, 1e-10, 1e-8, 1e-6, 1e-4};

  /// Factor A exactly or fail.
  static JitterSchedule none() { return JitterSchedule{{0.0}}; }
};

/// Lower Cholesky factor of A + jitter * I.
class CholeskyFactor {
 public:
  CholeskyFactor(Matrix lower, double jitter) : lower_(std::move(lower)), jitter_(jitter) {}

  const Matrix& lower() const noexcept { return lower_; }
  /// The absolute diagonal shift that was added to A.
  double jitter() const noexcept { return jitter_; }
  Index size() const noexcept { return lower_.rows(); }

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  /// L^{-1} b, used for posterior variances.
  Matrix solve_lower(const Matrix& b) const;
  Matrix inverse() const;
  double log_det() const;

 private:
  Matrix lower_;
  double jitter_;
};

bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);

/// Throws NumericError when A is asymmetric, non-finite, or still indefinite
/// after the largest jitter in the schedule.
CholeskyFactor cholesky(const Matrix& a, const JitterSchedule& schedule = {});

Vector solve_spd(const Matrix& a, const Vector& b, const JitterSchedule& schedule = {});
Matrix solve_spd(const Matrix& a, const Matrix& b, const JitterSchedule& schedule = {});

/// LU factorization with partial pivoting, written out as plain Gaussian
/// elimination. Handles the symmetric-indefinite bordered kriging system and
/// serves as the independent reference solver for the Cholesky path.
class LuFactor {
 public:
  explicit LuFactor(Matrix a);

  Vector solve(const Vector& b) const;
  Index size() const noexcept { return lu_.rows(); }

 private:
  Matrix lu_;
  std::vector<Index> pivots_;
};

Vector solve_general(const Matrix& a, const Vector& b);

/// max_i sum_j |a_ij|
double norm_inf(const Matrix& a);

}  // namespace geoaug
