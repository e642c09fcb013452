#include "wharm/targets.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "wharm/simd.hpp"

namespace wharm {

GaussianSpec::GaussianSpec(Vector m, LowerFactor l) : mean(std::move(m)), cov_factor(std::move(l)) {
  if (mean.size() != cov_factor.dim()) {
    throw std::invalid_argument("GaussianSpec: mean and factor dimensions differ");
  }
}

GaussianSpec GaussianSpec::standard(Eigen::Index dim) {
  return GaussianSpec(Vector::Zero(dim), LowerFactor::identity(dim));
}

GaussianSpec GaussianSpec::isotropic(Vector mean, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("GaussianSpec: variance must be positive");
  const auto d = mean.size();
  return GaussianSpec(std::move(mean), LowerFactor::scaled_identity(d, std::sqrt(variance)));
}

TargetModel gaussian_target(const GaussianSpec& spec) {
  TargetModel t;
  t.dim = static_cast<std::size_t>(spec.dim());
  t.log_gamma = [spec](const Vector& x) {
    const Vector z = spec.cov_factor.solve(x - spec.mean);
    return -0.5 * simd::sum_squares(as_span(z));
  };
  t.grad_log_gamma = [spec](const Vector& x) {
    const Matrix& l = spec.cov_factor.matrix();
    const Vector z = spec.cov_factor.solve(x - spec.mean);
    if (spec.cov_factor.is_diagonal()) return Vector(-z.cwiseQuotient(l.diagonal()));
    return Vector(-(l.triangularView<Eigen::Lower>().transpose().solve(z)));
  };
  return t;
}

double gaussian_log_density(const GaussianSpec& spec, const Vector& x) {
  if (x.size() != spec.dim()) throw std::invalid_argument("gaussian_log_density: dimension mismatch");
  const Vector z = spec.cov_factor.solve(x - spec.mean);
  const double d = static_cast<double>(spec.dim());
  return -0.5 * simd::sum_squares(as_span(z)) - 0.5 * d * std::log(2.0 * std::numbers::pi) -
         spec.cov_factor.log_det();
}

Vector sample_gaussian(const GaussianSpec& spec, Stream& rng) {
  Vector v(spec.dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.standard_normal();
  return spec.mean + spec.cov_factor.apply(v);
}

void StochVolSpec::validate() const {
  if (!(params.beta > 0.0)) throw std::invalid_argument("stochvol: beta must be positive");
  if (!(params.sigma > 0.0)) throw std::invalid_argument("stochvol: sigma must be positive");
  if (!(std::abs(params.phi) < 1.0)) throw std::invalid_argument("stochvol: |phi| must be < 1");
  if (y.size() < 2) throw std::invalid_argument("stochvol: need at least two observations");
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("stochvol: non-finite observation");
  }
}

TargetModel stochvol_target(const StochVolSpec& spec) {
  spec.validate();
  const double phi = spec.params.phi;
  const double inv_s2 = 1.0 / (spec.params.sigma * spec.params.sigma);
  const double inv_b2 = 1.0 / (spec.params.beta * spec.params.beta);
  const double log_beta = std::log(spec.params.beta);
  Vector y_sq(static_cast<Eigen::Index>(spec.y.size()));
  for (std::size_t i = 0; i < spec.y.size(); ++i) y_sq[static_cast<Eigen::Index>(i)] = spec.y[i] * spec.y[i];
  const Eigen::Index n = y_sq.size();

  TargetModel t;
  t.dim = static_cast<std::size_t>(n);
  t.log_gamma = [=](const Vector& x) {
    double prior = (1.0 - phi * phi) * x[0] * x[0];
    for (Eigen::Index l = 1; l < n; ++l) {
      const double r = x[l] - phi * x[l - 1];
      prior += r * r;
    }
    double lik = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) lik += x[l] + y_sq[l] * inv_b2 * std::exp(-x[l]);
    return -0.5 * inv_s2 * prior - 0.5 * lik - static_cast<double>(n) * log_beta;
  };
  t.grad_log_gamma = [=](const Vector& x) {
    Vector g(n);
    for (Eigen::Index l = 0; l < n; ++l) g[l] = -0.5 + 0.5 * y_sq[l] * inv_b2 * std::exp(-x[l]);
    g[0] -= inv_s2 * (1.0 - phi * phi) * x[0];
    for (Eigen::Index l = 1; l < n; ++l) {
      const double r = x[l] - phi * x[l - 1];
      g[l] -= inv_s2 * r;
      g[l - 1] += inv_s2 * phi * r;
    }
    return g;
  };
  return t;
}

StochVolSample stochvol_simulate(const StochVolParams& p, std::size_t l, Stream& rng) {
  if (l < 1) throw std::invalid_argument("stochvol_simulate: L must be >= 1");
  if (!(std::abs(p.phi) < 1.0) || !(p.sigma >= 0.0) || !(p.beta > 0.0)) {
    throw std::invalid_argument("stochvol_simulate: invalid parameters");
  }
  StochVolSample s;
  s.x.resize(static_cast<Eigen::Index>(l + 1));
  s.y.resize(l + 1);
  s.x[0] = p.sigma / std::sqrt(1.0 - p.phi * p.phi) * rng.standard_normal();
  for (std::size_t i = 1; i <= l; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    s.x[k] = p.phi * s.x[k - 1] + p.sigma * rng.standard_normal();
  }
  for (std::size_t i = 0; i <= l; ++i) {
    s.y[i] = p.beta * std::exp(s.x[static_cast<Eigen::Index>(i)] / 2.0) * rng.standard_normal();
  }
  return s;
}

std::vector<double> read_observations_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open observations file " + path.string());
  std::vector<double> y;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(line, &used);
      if (used != line.size()) throw std::invalid_argument("trailing characters");
      y.push_back(v);
    } catch (const std::exception&) {
      if (!first) throw std::runtime_error("bad observation line in " + path.string() + ": " + line);
    }
    first = false;
  }
  return y;
}

void write_observations_csv(const std::filesystem::path& path, const std::vector<double>& y) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write observations file " + path.string());
  out << "y\n";
  char buf[32];
  for (double v : y) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << '\n';
  }
}

Matrix finite_difference_hessian(const TargetModel& target, const Vector& x, double step) {
  const auto n = x.size();
  Matrix h(n, n);
  Vector xp = x, xm = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    h.col(j) = (target.grad_log_gamma(xp) - target.grad_log_gamma(xm)) / (2.0 * step);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return 0.5 * (h + h.transpose());
}

GaussianSpec laplace_approx(const TargetModel& target, const Vector& init, const LaplaceOptions& opt) {
  if (!target.has_gradient()) throw std::invalid_argument("laplace_approx: target has no gradient");
  if (static_cast<std::size_t>(init.size()) != target.dim) {
    throw std::invalid_argument("laplace_approx: dimension mismatch");
  }
  Vector x = init;
  double f = target.log_gamma(x);
  Vector g = target.grad_log_gamma(x);
  int iter = 0;
  while (g.norm() >= opt.gradient_tolerance) {
    if (++iter > opt.max_iterations) {
      throw std::runtime_error("laplace_approx: no convergence after " +
                               std::to_string(opt.max_iterations) + " iterations (gradient norm " +
                               std::to_string(g.norm()) + ")");
    }
    // Newton direction when -H is positive-definite, otherwise plain ascent.
    const Matrix neg_h = -finite_difference_hessian(target, x, opt.fd_step);
    Eigen::LLT<Matrix> llt(neg_h);
    Vector dir = llt.info() == Eigen::Success ? Vector(llt.solve(g)) : g;
    if (dir.dot(g) <= 0.0) dir = g;
    double step = 1.0;
    bool moved = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      const Vector cand = x + step * dir;
      const double fc = target.log_gamma(cand);
      if (std::isfinite(fc) && fc >= f + 1e-4 * step * dir.dot(g)) {
        x = cand;
        f = fc;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    g = target.grad_log_gamma(x);
  }
  if (g.norm() >= opt.gradient_tolerance) {
    throw std::runtime_error("laplace_approx: line search stalled before convergence");
  }

  Matrix precision = -finite_difference_hessian(target, x, opt.fd_step);
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) {
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(precision).eigenvalues().minCoeff();
    double jitter = 1e-8 * (1.0 + std::abs(min_eig));
    do {
      precision.diagonal().array() += jitter;
      llt.compute(precision);
      jitter *= 2.0;
    } while (llt.info() != Eigen::Success);
  }
  const Matrix cov = llt.solve(Matrix::Identity(x.size(), x.size()));
  return GaussianSpec(x, LowerFactor::from_covariance(0.5 * (cov + cov.transpose())));
}

}  // namespace wharm
