#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "wharm/linalg.hpp"
#include "wharm/rng.hpp"

namespace wharm {

// Target known up to a normalizing constant: log_gamma = log pi + const.
struct TargetModel {
  std::size_t dim = 0;
  std::function<double(const Vector&)> log_gamma;
  std::function<Vector(const Vector&)> grad_log_gamma;  // empty when unavailable

  bool has_gradient() const { return static_cast<bool>(grad_log_gamma); }
};

struct GaussianSpec {
  Vector mean;
  LowerFactor cov_factor;

  GaussianSpec(Vector m, LowerFactor l);
  static GaussianSpec standard(Eigen::Index dim);
  static GaussianSpec isotropic(Vector mean, double variance);
  Eigen::Index dim() const { return mean.size(); }
};

// log_gamma(x) = -|L^{-1}(x - mean)|^2 / 2, normalizing constant dropped.
TargetModel gaussian_target(const GaussianSpec& spec);
// Full normalized log-density.
double gaussian_log_density(const GaussianSpec& spec, const Vector& x);
Vector sample_gaussian(const GaussianSpec& spec, Stream& rng);

struct StochVolParams {
  double beta = 0.65;
  double phi = 0.98;
  double sigma = 0.15;
};

struct StochVolSpec {
  StochVolParams params;
  std::vector<double> y;  // y_0 .. y_L

  void validate() const;
};

// Latent AR(1) log-volatility x_0..x_L with y_l ~ N(0, beta^2 exp(x_l)).
// Constants not depending on (beta, x) are dropped; the -log(beta) per
// observation is kept.
TargetModel stochvol_target(const StochVolSpec& spec);

struct StochVolSample {
  Vector x;
  std::vector<double> y;
};
// Draws x_0 from the stationary law and y_l = beta exp(x_l / 2) eta_l.
// sigma = 0 is allowed and yields x = 0.
StochVolSample stochvol_simulate(const StochVolParams& params, std::size_t l, Stream& rng);

// Single-column CSV; an optional non-numeric header line is skipped.
std::vector<double> read_observations_csv(const std::filesystem::path& path);
void write_observations_csv(const std::filesystem::path& path, const std::vector<double>& y);

struct LaplaceOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  double fd_step = 1e-5;
};

// Central differences of the gradient, symmetrized.
Matrix finite_difference_hessian(const TargetModel& target, const Vector& x, double step);

// Gaussian N(mode, (-H)^{-1}) with H the finite-difference Hessian at the mode.
// The mode is found by damped Newton ascent with a gradient-ascent fallback;
// throws std::runtime_error when the gradient norm does not reach the
// tolerance within max_iterations.
GaussianSpec laplace_approx(const TargetModel& target, const Vector& init,
                            const LaplaceOptions& options = {});

}  // namespace wharm
