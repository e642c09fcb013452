#include "wharm/couplings.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "wharm/simd.hpp"

namespace wharm {
namespace {

Vector standard_normal_vector(Eigen::Index d, Stream& rng) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.standard_normal();
  return v;
}

bool bitwise_equal(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

void check_dim(const Vector& v, std::size_t d) {
  if (static_cast<std::size_t>(v.size()) != d) throw std::invalid_argument("kernel: dimension mismatch");
}

class Ar1Kernel final : public CoupledKernel {
 public:
  Ar1Kernel(double rho, std::size_t dim)
      : rho_(rho), dim_(dim),
        noise_(LowerFactor::scaled_identity(static_cast<Eigen::Index>(dim), std::sqrt(1.0 - rho * rho))) {}

  std::size_t dim() const override { return dim_; }
  std::string_view name() const override { return "ar1"; }

  CoupledStep step(const Vector& x, const Vector& y, Stream& rng) const override {
    check_dim(x, dim_);
    check_dim(y, dim_);
    auto s = reflection_maximal_sample(rho_ * x, rho_ * y, noise_, rng);
    return {std::move(s.x), std::move(s.y), s.met};
  }

  Vector single_step(const Vector& x, Stream& rng) const override {
    check_dim(x, dim_);
    return rho_ * x + noise_.apply(standard_normal_vector(x.size(), rng));
  }

 private:
  double rho_;
  std::size_t dim_;
  LowerFactor noise_;
};

// Shared machinery for RWMH and MALA: reflection-maximal proposals followed by
// a common-uniform accept/reject.
class MetropolisKernel : public CoupledKernel {
 public:
  MetropolisKernel(TargetModel target, double delta, LowerFactor precond)
      : target_(std::move(target)), delta_(delta), proposal_(precond.scaled(std::sqrt(delta))) {
    if (!target_.log_gamma) throw std::invalid_argument("kernel: target has no log density");
    if (!(delta > 0.0)) throw std::invalid_argument("kernel: step size must be positive");
    if (static_cast<std::size_t>(precond.dim()) != target_.dim) {
      throw std::invalid_argument("kernel: preconditioner dimension differs from target");
    }
  }

  std::size_t dim() const override { return target_.dim; }
  bool uses_acceptance() const override { return true; }

  CoupledStep step(const Vector& x, const Vector& y, Stream& rng) const override {
    check_dim(x, dim());
    check_dim(y, dim());
    const bool same_start = bitwise_equal(x, y);
    const State sx = evaluate(x);
    const State sy = same_start ? sx : evaluate(y);
    auto prop = reflection_maximal_sample(sx.mean, sy.mean, proposal_, rng);
    const double log_u = std::log(rng.uniform());

    CoupledStep out;
    out.accepted_x = log_u < log_accept(sx, prop.x);
    out.accepted_y = same_start ? out.accepted_x : log_u < log_accept(sy, prop.y);
    out.x = out.accepted_x ? std::move(prop.x) : x;
    if (same_start) {
      out.y = out.x;
      out.met = true;
    } else {
      out.y = out.accepted_y ? std::move(prop.y) : y;
      out.met = prop.met && out.accepted_x && out.accepted_y;
      if (out.met) out.y = out.x;
    }
    return out;
  }

  Vector single_step(const Vector& x, Stream& rng) const override {
    check_dim(x, dim());
    const State sx = evaluate(x);
    Vector prop = sx.mean + proposal_.apply(standard_normal_vector(x.size(), rng));
    const double log_u = std::log(rng.uniform());
    return log_u < log_accept(sx, prop) ? prop : x;
  }

 protected:
  struct State {
    Vector point;
    double log_gamma;
    Vector mean;  // proposal mean
  };

  virtual State evaluate(const Vector& x) const = 0;
  // log of the MH ratio for moving from `from` to `to`.
  virtual double log_accept(const State& from, const Vector& to) const = 0;

  TargetModel target_;
  double delta_;
  LowerFactor proposal_;  // sqrt(delta) L
};

class RwmhKernel final : public MetropolisKernel {
 public:
  using MetropolisKernel::MetropolisKernel;
  std::string_view name() const override { return "rwmh"; }

 protected:
  State evaluate(const Vector& x) const override { return {x, target_.log_gamma(x), x}; }
  double log_accept(const State& from, const Vector& to) const override {
    return target_.log_gamma(to) - from.log_gamma;
  }
};

class MalaKernel final : public MetropolisKernel {
 public:
  MalaKernel(TargetModel target, double delta, LowerFactor precond)
      : MetropolisKernel(std::move(target), delta, precond), precond_(std::move(precond)) {
    if (!target_.has_gradient()) throw std::invalid_argument("mala: target has no gradient");
  }
  std::string_view name() const override { return "mala"; }

 protected:
  State evaluate(const Vector& x) const override {
    return {x, target_.log_gamma(x), drift_mean(x, target_.grad_log_gamma(x))};
  }

  double log_accept(const State& from, const Vector& to) const override {
    const State back = evaluate(to);
    return back.log_gamma + log_q(from.point, back.mean) - from.log_gamma - log_q(to, from.mean);
  }

 private:
  Vector drift_mean(const Vector& x, const Vector& grad) const {
    return x + 0.5 * delta_ * precond_.apply_covariance(grad);
  }
  // log N(point; mean, delta L L^T) without the shared constant.
  double log_q(const Vector& point, const Vector& mean) const {
    const Vector z = proposal_.solve(point - mean);
    return -0.5 * simd::sum_squares(as_span(z));
  }

  LowerFactor precond_;
};

class SyntheticKernel final : public CoupledKernel {
 public:
  SyntheticKernel(double p_c, std::size_t dim) : p_c_(p_c), dim_(dim) {}
  std::size_t dim() const override { return dim_; }
  std::string_view name() const override { return "synthetic"; }

  CoupledStep step(const Vector& x, const Vector& y, Stream& rng) const override {
    check_dim(x, dim_);
    check_dim(y, dim_);
    const auto d = static_cast<Eigen::Index>(dim_);
    // Chains that already agree share the draw, which keeps the coupling faithful.
    const bool shared = rng.uniform() < p_c_;
    if (shared || bitwise_equal(x, y)) {
      Vector z = standard_normal_vector(d, rng);
      return {z, z, true};
    }
    Vector a = standard_normal_vector(d, rng);
    Vector b = standard_normal_vector(d, rng);
    return {std::move(a), std::move(b), false};
  }

  Vector single_step(const Vector& x, Stream& rng) const override {
    check_dim(x, dim_);
    return standard_normal_vector(x.size(), rng);
  }

 private:
  double p_c_;
  std::size_t dim_;
};

}  // namespace

ReflectionSample reflection_maximal_sample(const Vector& mu1, const Vector& mu2,
                                           const LowerFactor& factor, Stream& rng) {
  if (mu1.size() != mu2.size() || mu1.size() != factor.dim()) {
    throw std::invalid_argument("reflection_maximal_sample: dimension mismatch");
  }
  const Eigen::Index d = mu1.size();
  Vector v = standard_normal_vector(d, rng);
  if (bitwise_equal(mu1, mu2)) {
    Vector x = mu1 + factor.apply(v);
    return {x, x, true};
  }
  const Vector z = factor.solve(mu1 - mu2);
  const double u = rng.uniform();
  const double zv = simd::dot(as_span(z), as_span(v));
  const double zz = simd::sum_squares(as_span(z));
  // log N(V + z) - log N(V) = -<z, V> - |z|^2 / 2
  if (std::log(u) < -zv - 0.5 * zz) {
    Vector x = mu1 + factor.apply(v);
    return {x, x, true};
  }
  Vector w = v;
  simd::axpy(-2.0 * zv / zz, as_span(z), as_span(w));  // V - 2 <e, V> e
  return {mu1 + factor.apply(v), mu2 + factor.apply(w), false};
}

std::unique_ptr<CoupledKernel> ar1_coupled(double rho, std::size_t dim) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("ar1: rho must lie in (0, 1)");
  if (dim == 0) throw std::invalid_argument("ar1: dimension must be positive");
  return std::make_unique<Ar1Kernel>(rho, dim);
}

std::unique_ptr<CoupledKernel> rwmh_coupled(TargetModel target, double delta, LowerFactor precond) {
  return std::make_unique<RwmhKernel>(std::move(target), delta, std::move(precond));
}

std::unique_ptr<CoupledKernel> mala_coupled(TargetModel target, double delta, LowerFactor precond) {
  return std::make_unique<MalaKernel>(std::move(target), delta, std::move(precond));
}

std::unique_ptr<CoupledKernel> synthetic_coupler(double p_c, std::size_t dim) {
  if (!(p_c > 0.0 && p_c <= 1.0)) throw std::invalid_argument("synthetic: p_c must lie in (0, 1]");
  if (dim == 0) throw std::invalid_argument("synthetic: dimension must be positive");
  return std::make_unique<SyntheticKernel>(p_c, dim);
}

std::unique_ptr<CoupledKernel> make_kernel(const KernelParams& params, const TargetModel& target,
                                           const LowerFactor& precond) {
  struct Visitor {
    const TargetModel& target;
    const LowerFactor& precond;
    std::unique_ptr<CoupledKernel> operator()(const Ar1Params& p) const { return ar1_coupled(p.rho, target.dim); }
    std::unique_ptr<CoupledKernel> operator()(const RwmhParams& p) const {
      return rwmh_coupled(target, p.delta, precond);
    }
    std::unique_ptr<CoupledKernel> operator()(const MalaParams& p) const {
      return mala_coupled(target, p.delta, precond);
    }
    std::unique_ptr<CoupledKernel> operator()(const SyntheticParams& p) const {
      return synthetic_coupler(p.p_c, target.dim);
    }
  };
  return std::visit(Visitor{target, precond}, params);
}

}  // namespace wharm
