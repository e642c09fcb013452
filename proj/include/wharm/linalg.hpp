#pragma once

#include <Eigen/Dense>
#include <span>

namespace wharm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
inline std::span<double> as_span(Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// Lower-triangular matrix L with strictly positive, finite diagonal; the
// covariance it represents is L L^T. Diagonal factors take a fast path.
class LowerFactor {
 public:
  // Throws std::invalid_argument for non-square, non-lower-triangular, or
  // singular (non-positive diagonal) input.
  explicit LowerFactor(Matrix lower);

  static LowerFactor identity(Eigen::Index dim);
  static LowerFactor scaled_identity(Eigen::Index dim, double scale);
  static LowerFactor diagonal(const Vector& diag);
  // Cholesky factor of a symmetric positive-definite covariance.
  static LowerFactor from_covariance(const Matrix& cov);

  Eigen::Index dim() const { return lower_.rows(); }
  bool is_diagonal() const { return diagonal_; }
  const Matrix& matrix() const { return lower_; }

  Vector apply(const Vector& v) const;            // L v
  Vector solve(const Vector& v) const;            // L^{-1} v
  Vector apply_covariance(const Vector& v) const; // L L^T v
  Matrix covariance() const;
  double log_det() const;                         // log |L| = sum log L_ii
  LowerFactor scaled(double s) const;

 private:
  Matrix lower_;
  bool diagonal_ = false;
};

}  // namespace wharm
