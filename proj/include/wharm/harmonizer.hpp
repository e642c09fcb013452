#pragma once

// Weight harmonization of 2N parallel MCMC chains.
//
// Chains n and A^n + N (0-based: n and pairing[n] + N) are propagated with a
// coupled kernel. When they meet, both log-weights are replaced by the log of
// their average, which leaves the total weight unchanged. Pairs that met then
// exchange partners through a random permutation of the coupled indices, so
// weight information spreads across the whole population. The normalized
// weights give a consistent weighted approximation of the target, and
// (1/2N) sum f(2N W^n) is an upper bound, with high probability, on the
// f-divergence between the target and the law of the chains.
//
// Determinism: the pair n at step t draws from Stream{seed, t, n}; the
// reshuffle at step t draws from Stream{seed, t, kReshuffleLane}; initial
// particle i draws from Stream{seed, kInitStep, i}. Results do not depend on
// the number of threads.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "wharm/couplings.hpp"
#include "wharm/divergences.hpp"
#include "wharm/targets.hpp"

namespace wharm {

enum class ReshufflePolicy { uniform_permutation, derangement };

std::string_view to_string(ReshufflePolicy p);
ReshufflePolicy parse_reshuffle_policy(std::string_view text);

struct HarmonizerConfig {
  // The averaging weight is fixed to 1/2, the value that maximizes the ESS gain
  // of a merge.
  static constexpr double alpha = 0.5;

  ReshufflePolicy reshuffle_policy = ReshufflePolicy::derangement;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ParticleSystem {
  std::vector<Vector> states;         // 2N chain states
  std::vector<double> log_w;          // unnormalized log-weights
  std::vector<std::size_t> pairing;   // permutation of {0..N-1}
  std::uint64_t t = 0;

  std::size_t n_pairs() const { return pairing.size(); }
  std::size_t dim() const { return states.empty() ? 0 : static_cast<std::size_t>(states.front().size()); }
  WeightVector weights() const { return normalize_log_weights(log_w); }
  // Throws std::logic_error on a broken invariant.
  void validate() const;
};

struct StepReport {
  std::vector<std::size_t> coupled_set;          // pair indices that met, ascending
  std::size_t n_met = 0;
  std::vector<std::size_t> permutation_applied;  // sigma on {0..N-1}
  std::size_t n_accepted = 0;                    // accepted proposals out of 2N
  std::size_t n_proposals = 0;
};

// 2N independent draws from mu0 weighted by gamma / mu0.
// Throws std::domain_error naming the first particle with a non-finite
// log-weight.
ParticleSystem init_system(const GaussianSpec& mu0, const TargetModel& target, std::size_t n_pairs,
                           std::uint64_t seed, int threads = 1);

StepReport harmonize_step(ParticleSystem& system, const CoupledKernel& kernel,
                          const HarmonizerConfig& config);

// sum W^n phi(X^n). Throws std::domain_error naming a particle where phi is not finite.
Vector weighted_estimate(const ParticleSystem& system, const std::function<Vector(const Vector&)>& phi);

struct DiagnosticRecord {
  std::uint64_t t = 0;
  double ess = 0.0;
  std::size_t n_met = 0;
  double cum_met_fraction = 0.0;  // meetings so far / (N t)
  double min_w = 0.0;
  double max_w = 0.0;
  double logsumexp_w = 0.0;
  std::vector<double> bounds;  // one per spec, (1/2N) sum f(2N W^n)
};

DiagnosticRecord diagnostics(const ParticleSystem& system, const std::vector<FDivergenceSpec>& specs,
                             std::size_t n_met = 0, double cum_met_fraction = 0.0);

// ESS after averaging entries j and k, by the closed-form update
//   ess / (1 - ess (W^j - W^k)^2 / 2).
double ess_after_merge(const WeightVector& w, std::size_t j, std::size_t k);
// Upper bound on any single merge: ess / (1 - (kappa-1)^2 / (2 (kappa^2 + M - 1))),
// kappa = max W / min W. Equals 2 ess when min W = 0.
double ess_merge_kappa_bound(const WeightVector& w);

struct RunResult {
  std::vector<DiagnosticRecord> trace;  // T + 1 records, t = 0..T
  std::size_t n_accepted = 0;
  std::size_t n_proposals = 0;

  double acceptance_rate() const;
};

using StepObserver = std::function<void(const ParticleSystem&, const DiagnosticRecord&)>;

RunResult run(ParticleSystem& system, const CoupledKernel& kernel,
              const std::vector<FDivergenceSpec>& specs, std::uint64_t steps,
              const HarmonizerConfig& config, const StepObserver& observer = {});

}  // namespace wharm
