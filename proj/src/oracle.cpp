#include "wharm/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wharm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::LLT<Matrix> checked_llt(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw std::invalid_argument(std::string(what) + ": not positive-definite");
  return llt;
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

void check_same_dim(const GaussianMarginal& p, const GaussianMarginal& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("oracle: dimension mismatch");
}

}  // namespace

GaussianMarginal::GaussianMarginal(Vector m, Matrix c) : mean(std::move(m)), cov(std::move(c)) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw std::invalid_argument("GaussianMarginal: covariance shape mismatch");
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("GaussianMarginal: covariance is not symmetric");
  }
  checked_llt(cov, "GaussianMarginal covariance");
}

GaussianMarginal GaussianMarginal::from_spec(const GaussianSpec& spec) {
  return {spec.mean, spec.cov_factor.covariance()};
}

GaussianMarginal gaussian_marginal_t(const GaussianMarginal& start, double rho, int t) {
  if (t < 0) throw std::invalid_argument("gaussian_marginal_t: t must be non-negative");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("gaussian_marginal_t: rho must lie in (0, 1)");
  const double rt = std::pow(rho, t);
  const double r2t = rt * rt;
  const auto d = start.dim();
  return {rt * start.mean, r2t * start.cov + (1.0 - r2t) * Matrix::Identity(d, d)};
}

GaussianMarginal gaussian_marginal_t(const GaussianSpec& mu0, double rho, int t) {
  return gaussian_marginal_t(GaussianMarginal::from_spec(mu0), rho, t);
}

double gaussian_chi2(const GaussianMarginal& p, const GaussianMarginal& q) {
  check_same_dim(p, q);
  // int p^2/q = |S_p|^{-1} |S_q|^{1/2} |A|^{-1/2} exp(b^T A^{-1} b / 2 - c)
  // A = 2 P_p - P_q, b = 2 P_p m_p - P_q m_q, c = m_p^T P_p m_p - m_q^T P_q m_q / 2
  const auto llt_p = checked_llt(p.cov, "gaussian_chi2 p");
  const auto llt_q = checked_llt(q.cov, "gaussian_chi2 q");
  const auto d = p.dim();
  const Matrix prec_p = llt_p.solve(Matrix::Identity(d, d));
  const Matrix prec_q = llt_q.solve(Matrix::Identity(d, d));
  Matrix a = 2.0 * prec_p - prec_q;
  a = 0.5 * (a + a.transpose());
  Eigen::LLT<Matrix> llt_a(a);
  if (llt_a.info() != Eigen::Success) return kInf;
  const Vector pm = prec_p * p.mean;
  const Vector qm = prec_q * q.mean;
  const Vector b = 2.0 * pm - qm;
  const double c = p.mean.dot(pm) - 0.5 * q.mean.dot(qm);
  const double log_int = -log_det(llt_p) + 0.5 * log_det(llt_q) - 0.5 * log_det(llt_a) +
                         0.5 * b.dot(llt_a.solve(b)) - c;
  return std::expm1(log_int);
}

double gaussian_kl(const GaussianMarginal& p, const GaussianMarginal& q) {
  check_same_dim(p, q);
  const auto llt_p = checked_llt(p.cov, "gaussian_kl p");
  const auto llt_q = checked_llt(q.cov, "gaussian_kl q");
  const Vector diff = q.mean - p.mean;
  const double trace = llt_q.solve(p.cov).trace();
  const double quad = diff.dot(llt_q.solve(diff));
  return 0.5 * (trace + quad - static_cast<double>(p.dim()) + log_det(llt_q) - log_det(llt_p));
}

double quadrature_f_divergence_1d(const FDivergenceSpec& spec, const LogDensity1d& log_p,
                                  const LogDensity1d& log_q, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("quadrature: empty interval");
  bool overflow = false;
  auto integrand = [&](double x) {
    const double lq = log_q(x);
    const double q = std::exp(lq);
    if (q == 0.0) return 0.0;
    const double v = q * spec(std::exp(log_p(x) - lq));
    if (!std::isfinite(v)) overflow = true;
    return std::isfinite(v) ? v : 0.0;
  };
  double error = 0.0, l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, lo, hi, 25, 1e-13, &error, &l1);
  if (overflow) throw std::runtime_error("quadrature: integrand overflows inside the window");
  if (!std::isfinite(value) || error > 1e-9 * std::max(1.0, l1)) {
    throw std::runtime_error("quadrature: integration did not converge (error estimate " +
                             std::to_string(error) + ")");
  }
  return value;
}

double quadrature_f_divergence_1d(const FDivergenceSpec& spec, const GaussianMarginal& p,
                                  const GaussianMarginal& q) {
  if (p.dim() != 1 || q.dim() != 1) throw std::invalid_argument("quadrature: 1D Gaussians required");
  const double mp = p.mean[0], mq = q.mean[0];
  const double vp = p.cov(0, 0), vq = q.cov(0, 0);
  double lo = std::min(mp - 12.0 * std::sqrt(vp), mq - 12.0 * std::sqrt(vq));
  double hi = std::max(mp + 12.0 * std::sqrt(vp), mq + 12.0 * std::sqrt(vq));
  // p^2 / q is Gaussian with precision 2/vp - 1/vq and can sit far from both.
  const double a = 2.0 / vp - 1.0 / vq;
  if (a > 0.0) {
    const double centre = (2.0 * mp / vp - mq / vq) / a;
    lo = std::min(lo, centre - 12.0 / std::sqrt(a));
    hi = std::max(hi, centre + 12.0 / std::sqrt(a));
  }
  auto log_normal = [](double m, double v) {
    return [m, v](double x) {
      return -0.5 * (x - m) * (x - m) / v - 0.5 * std::log(2.0 * std::numbers::pi * v);
    };
  };
  return quadrature_f_divergence_1d(spec, log_normal(mp, vp), log_normal(mq, vq), lo, hi);
}

std::vector<double> theoretical_ess_curve(const GaussianSpec& mu0, double rho, std::size_t m, int steps) {
  std::vector<double> out;
  for (const auto& row : oracle_curve(mu0, rho, m, steps)) out.push_back(row.ess_star);
  return out;
}

std::vector<OracleRow> oracle_curve(const GaussianSpec& mu0, double rho, std::size_t m, int steps) {
  if (steps < 0) throw std::invalid_argument("oracle_curve: negative step count");
  if (m == 0) throw std::invalid_argument("oracle_curve: sample size must be positive");
  const auto d = mu0.dim();
  const GaussianMarginal target(Vector::Zero(d), Matrix::Identity(d, d));
  const GaussianMarginal start = GaussianMarginal::from_spec(mu0);
  std::vector<OracleRow> rows;
  rows.reserve(static_cast<std::size_t>(steps) + 1);
  for (int t = 0; t <= steps; ++t) {
    const GaussianMarginal mu_t = gaussian_marginal_t(start, rho, t);
    OracleRow r;
    r.t = t;
    r.chi2 = gaussian_chi2(target, mu_t);
    r.kl = gaussian_kl(target, mu_t);
    r.ess_star = std::isinf(r.chi2) ? 0.0 : theoretical_ess(std::max(r.chi2, 0.0), m);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace wharm
