#include "wharm/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace wharm {

LowerFactor::LowerFactor(Matrix lower) : lower_(std::move(lower)) {
  if (lower_.rows() != lower_.cols() || lower_.rows() == 0) {
    throw std::invalid_argument("LowerFactor: matrix must be square and non-empty");
  }
  diagonal_ = true;
  for (Eigen::Index j = 0; j < lower_.cols(); ++j) {
    for (Eigen::Index i = 0; i < lower_.rows(); ++i) {
      const double v = lower_(i, j);
      if (!std::isfinite(v)) throw std::invalid_argument("LowerFactor: non-finite entry");
      if (i < j && v != 0.0) throw std::invalid_argument("LowerFactor: matrix is not lower-triangular");
      if (i > j && v != 0.0) diagonal_ = false;
    }
    if (!(lower_(j, j) > 0.0)) {
      throw std::invalid_argument("LowerFactor: singular factor (non-positive diagonal)");
    }
  }
}

LowerFactor LowerFactor::identity(Eigen::Index dim) { return scaled_identity(dim, 1.0); }

LowerFactor LowerFactor::scaled_identity(Eigen::Index dim, double scale) {
  return LowerFactor(Matrix::Identity(dim, dim) * scale);
}

LowerFactor LowerFactor::diagonal(const Vector& diag) { return LowerFactor(Matrix(diag.asDiagonal())); }

LowerFactor LowerFactor::from_covariance(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("LowerFactor: covariance is not positive-definite");
  }
  Matrix l = llt.matrixL();
  return LowerFactor(std::move(l));
}

Vector LowerFactor::apply(const Vector& v) const {
  if (diagonal_) return lower_.diagonal().cwiseProduct(v);
  return lower_.triangularView<Eigen::Lower>() * v;
}

Vector LowerFactor::solve(const Vector& v) const {
  if (diagonal_) return v.cwiseQuotient(lower_.diagonal());
  return lower_.triangularView<Eigen::Lower>().solve(v);
}

Vector LowerFactor::apply_covariance(const Vector& v) const {
  if (diagonal_) return lower_.diagonal().array().square().matrix().cwiseProduct(v);
  Vector w = lower_.triangularView<Eigen::Lower>().transpose() * v;
  return lower_.triangularView<Eigen::Lower>() * w;
}

Matrix LowerFactor::covariance() const { return lower_ * lower_.transpose(); }

double LowerFactor::log_det() const { return lower_.diagonal().array().log().sum(); }

LowerFactor LowerFactor::scaled(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("LowerFactor::scaled: scale must be positive");
  return LowerFactor(lower_ * s);
}

}  // namespace wharm
