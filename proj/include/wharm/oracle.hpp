#pragma once

// Closed-form ground truth for the Gaussian AR(1) experiment. With
// mu_0 = N(m, S) and the kernel N(rho x, (1 - rho^2) I), the chain law is
//     mu_t = N(rho^t m, rho^{2t} S + (1 - rho^{2t}) I),
// so chi2 and KL between the N(0, I) target and mu_t are available exactly.

#include <functional>
#include <vector>

#include "wharm/divergences.hpp"
#include "wharm/linalg.hpp"
#include "wharm/targets.hpp"

namespace wharm {

struct GaussianMarginal {
  Vector mean;
  Matrix cov;

  GaussianMarginal(Vector m, Matrix c);  // throws unless symmetric positive-definite
  static GaussianMarginal from_spec(const GaussianSpec& spec);
  Eigen::Index dim() const { return mean.size(); }
};

GaussianMarginal gaussian_marginal_t(const GaussianMarginal& start, double rho, int t);
GaussianMarginal gaussian_marginal_t(const GaussianSpec& mu0, double rho, int t);

// chi2(p || q) = int p^2 / q - 1; +inf when 2 p.cov^{-1} - q.cov^{-1} is not
// positive-definite.
double gaussian_chi2(const GaussianMarginal& p, const GaussianMarginal& q);
// KL(p || q).
double gaussian_kl(const GaussianMarginal& p, const GaussianMarginal& q);

using LogDensity1d = std::function<double(double)>;

// int q(x) f(p(x) / q(x)) dx over [lo, hi] by adaptive Gauss-Kronrod.
// Throws std::runtime_error when q f(p/q) overflows somewhere in the window or
// the error estimate exceeds 1e-9 relative to the integral of |integrand|.
double quadrature_f_divergence_1d(const FDivergenceSpec& spec, const LogDensity1d& log_p,
                                  const LogDensity1d& log_q, double lo, double hi);
// Gaussian convenience overload; the window covers 12 standard deviations of
// p, q and, when it is normalizable, the p^2/q component.
double quadrature_f_divergence_1d(const FDivergenceSpec& spec, const GaussianMarginal& p,
                                  const GaussianMarginal& q);

// M / (chi2(N(0, I) || mu_t) + 1) for t = 0..T.
std::vector<double> theoretical_ess_curve(const GaussianSpec& mu0, double rho, std::size_t m, int steps);

struct OracleRow {
  int t = 0;
  double chi2 = 0.0;
  double kl = 0.0;
  double ess_star = 0.0;
};
std::vector<OracleRow> oracle_curve(const GaussianSpec& mu0, double rho, std::size_t m, int steps);

}  // namespace wharm
