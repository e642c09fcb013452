#pragma once

// pi-invariant Markov kernels together with a coupling of each kernel with
// itself. A coupled step moves two chains at once; each chain taken alone
// follows the single-chain kernel, and the pair lands on the same state
// ("meets") with positive probability. Meeting is reported through the `met`
// flag, and met implies the two returned states are bitwise identical.
// All couplings are faithful: chains that start bitwise equal stay equal and
// report met.

#include <memory>
#include <string_view>
#include <variant>

#include "wharm/linalg.hpp"
#include "wharm/rng.hpp"
#include "wharm/targets.hpp"

namespace wharm {

struct CoupledStep {
  Vector x;
  Vector y;
  bool met = false;
  bool accepted_x = true;  // Metropolis-Hastings kernels only
  bool accepted_y = true;
};

class CoupledKernel {
 public:
  virtual ~CoupledKernel() = default;
  virtual std::size_t dim() const = 0;
  virtual std::string_view name() const = 0;
  virtual bool uses_acceptance() const { return false; }
  virtual CoupledStep step(const Vector& x, const Vector& y, Stream& rng) const = 0;
  virtual Vector single_step(const Vector& x, Stream& rng) const = 0;
};

struct ReflectionSample {
  Vector x;
  Vector y;
  bool met = false;
};

// Reflection-maximal coupling of N(mu1, L L^T) and N(mu2, L L^T).
// Identical means short-circuit to a shared draw.
ReflectionSample reflection_maximal_sample(const Vector& mu1, const Vector& mu2,
                                           const LowerFactor& factor, Stream& rng);

struct Ar1Params {
  double rho = 0.9;
};
struct RwmhParams {
  double delta = 1.0;
};
struct MalaParams {
  double delta = 1.0;
};
struct SyntheticParams {
  double p_c = 0.5;
};
using KernelParams = std::variant<Ar1Params, RwmhParams, MalaParams, SyntheticParams>;

// N(rho x, (1 - rho^2) I), invariant for the standard Gaussian.
std::unique_ptr<CoupledKernel> ar1_coupled(double rho, std::size_t dim);
// Random-walk MH with proposal N(x, delta L L^T); one shared uniform decides
// both acceptances.
std::unique_ptr<CoupledKernel> rwmh_coupled(TargetModel target, double delta, LowerFactor precond);
// MALA with proposal N(x + delta/2 L L^T grad log gamma(x), delta L L^T).
std::unique_ptr<CoupledKernel> mala_coupled(TargetModel target, double delta, LowerFactor precond);
// With probability p_c both chains get one shared N(0, I) draw, otherwise two
// independent draws. Chains that start bitwise equal always share the draw.
std::unique_ptr<CoupledKernel> synthetic_coupler(double p_c, std::size_t dim);

// Builds one of the kernels above. `target` and `precond` are required for
// rwmh/mala; ar1 and synthetic only use target.dim.
std::unique_ptr<CoupledKernel> make_kernel(const KernelParams& params, const TargetModel& target,
                                           const LowerFactor& precond);

}  // namespace wharm
