#pragma once

// f-divergence generators and divergences of weighted vs. unweighted
// empirical measures.
//
// For normalized weights W^1..W^M attached to points X^1..X^M, the divergence
// of sum_n W^n delta_{X^n} from the equally weighted measure is
//     (1/M) sum_n f(M W^n),
// which depends on the weights only. The chi-squared case reduces to
// M sum (W^n)^2 - 1 and is tied to the effective sample size by
//     ess(W) = M / (chi2 + 1).

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wharm {

struct FDivergenceSpec {
  std::string name;
  std::function<double(double)> f;        // convex on (0, inf), f(1) = 0
  std::function<double(double)> f_prime;  // midpoint of one-sided limits at a kink
  double f_at_zero = 0.0;                 // right limit at 0, may be +inf

  double operator()(double t) const { return t == 0.0 ? f_at_zero : f(t); }
};

// chi2, tv, kl, reverse_kl, hellinger2 in that order.
std::vector<FDivergenceSpec> builtin_specs();
// f(t) = |t - 1|^alpha for alpha >= 1, named "renyi_<alpha>". This is the
// power generator, not the log-form Renyi divergence.
FDivergenceSpec renyi_generator(double alpha);
// Accepts builtin names and "renyi_<alpha>". Throws std::invalid_argument
// listing the valid names.
FDivergenceSpec spec_by_name(std::string_view name);
std::vector<std::string> builtin_spec_names();

class WeightVector {
 public:
  // Validates finite, non-negative entries summing to one (within 1e-9).
  static WeightVector normalized(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  explicit WeightVector(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

double logsumexp(std::span<const double> log_w);
// exp(lw - logsumexp(lw)); throws if every entry is -inf or any is NaN/+inf.
WeightVector normalize_log_weights(std::span<const double> log_w);

// (1/M) sum f(M W^n); +inf propagates.
double empirical_f_divergence(const FDivergenceSpec& spec, const WeightVector& w);
// 1 / sum (W^n)^2.
double ess(const WeightVector& w);
// M / (chi2 + 1).
double theoretical_ess(double chi2_value, std::size_t m);

}  // namespace wharm
