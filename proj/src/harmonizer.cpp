#include "wharm/harmonizer.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <string>

#include "wharm/simd.hpp"

namespace wharm {
namespace {

// logaddexp(a, b) - log 2
double log_mean_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m)) - std::numbers::ln2;
}

// Runs body(i) for i in [0, n) on `threads` OpenMP threads and rethrows the
// first exception on the calling thread.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  std::exception_ptr error;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for num_threads(std::max(threads, 1)) schedule(static)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(wharm_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::string_view to_string(ReshufflePolicy p) {
  return p == ReshufflePolicy::derangement ? "derangement" : "uniform_permutation";
}

ReshufflePolicy parse_reshuffle_policy(std::string_view text) {
  if (text == "derangement") return ReshufflePolicy::derangement;
  if (text == "uniform_permutation") return ReshufflePolicy::uniform_permutation;
  throw std::invalid_argument("unknown reshuffle policy '" + std::string(text) +
                              "' (expected derangement or uniform_permutation)");
}

void ParticleSystem::validate() const {
  const std::size_t n = pairing.size();
  if (n == 0) throw std::logic_error("ParticleSystem: no pairs");
  if (states.size() != 2 * n || log_w.size() != 2 * n) {
    throw std::logic_error("ParticleSystem: expected 2N states and weights");
  }
  std::vector<bool> seen(n, false);
  for (std::size_t a : pairing) {
    if (a >= n || seen[a]) throw std::logic_error("ParticleSystem: pairing is not a permutation");
    seen[a] = true;
  }
  for (double lw : log_w) {
    if (!std::isfinite(lw)) throw std::logic_error("ParticleSystem: non-finite log-weight");
  }
}

ParticleSystem init_system(const GaussianSpec& mu0, const TargetModel& target, std::size_t n_pairs,
                           std::uint64_t seed, int threads) {
  if (n_pairs == 0) throw std::invalid_argument("init_system: need at least one pair");
  if (static_cast<std::size_t>(mu0.dim()) != target.dim) {
    throw std::invalid_argument("init_system: initial distribution and target dimensions differ");
  }
  ParticleSystem sys;
  sys.states.resize(2 * n_pairs);
  sys.log_w.resize(2 * n_pairs);
  parallel_for(2 * n_pairs, threads, [&](std::size_t i) {
    Stream rng({seed, kInitStep, i});
    sys.states[i] = sample_gaussian(mu0, rng);
    sys.log_w[i] = target.log_gamma(sys.states[i]) - gaussian_log_density(mu0, sys.states[i]);
  });
  for (std::size_t i = 0; i < sys.log_w.size(); ++i) {
    if (!std::isfinite(sys.log_w[i])) {
      throw std::domain_error("init_system: non-finite initial log-weight at particle " + std::to_string(i));
    }
  }
  sys.pairing.resize(n_pairs);
  for (std::size_t n = 0; n < n_pairs; ++n) sys.pairing[n] = n;
  return sys;
}

StepReport harmonize_step(ParticleSystem& sys, const CoupledKernel& kernel, const HarmonizerConfig& config) {
  const std::size_t n_pairs = sys.n_pairs();
  if (kernel.dim() != sys.dim()) throw std::invalid_argument("harmonize_step: kernel dimension mismatch");

  std::vector<char> met(n_pairs, 0);
  std::vector<unsigned char> accepted(n_pairs, 0);
  parallel_for(n_pairs, config.threads, [&](std::size_t n) {
    const std::size_t partner = sys.pairing[n] + n_pairs;
    Stream rng({config.seed, sys.t, n});
    CoupledStep s = kernel.step(sys.states[n], sys.states[partner], rng);
    assert(!s.met || s.x.size() == s.y.size());
    sys.states[n] = std::move(s.x);
    sys.states[partner] = std::move(s.y);
    accepted[n] = static_cast<unsigned char>(s.accepted_x) + static_cast<unsigned char>(s.accepted_y);
    if (s.met) {
#ifndef NDEBUG
      for (Eigen::Index i = 0; i < sys.states[n].size(); ++i) {
        assert(std::bit_cast<std::uint64_t>(sys.states[n][i]) ==
               std::bit_cast<std::uint64_t>(sys.states[partner][i]));
      }
#endif
      const double merged = log_mean_exp(sys.log_w[n], sys.log_w[partner]);
      sys.log_w[n] = merged;
      sys.log_w[partner] = merged;
      met[n] = 1;
    }
  });

  StepReport report;
  for (std::size_t n = 0; n < n_pairs; ++n) {
    if (met[n]) report.coupled_set.push_back(n);
    report.n_accepted += accepted[n];
  }
  report.n_proposals = kernel.uses_acceptance() ? 2 * n_pairs : 0;
  if (!kernel.uses_acceptance()) report.n_accepted = 0;
  report.n_met = report.coupled_set.size();

  report.permutation_applied.resize(n_pairs);
  for (std::size_t n = 0; n < n_pairs; ++n) report.permutation_applied[n] = n;
  const auto& c = report.coupled_set;
  if (c.size() > 1) {
    Stream rng({config.seed, sys.t, kReshuffleLane});
    const auto perm = config.reshuffle_policy == ReshufflePolicy::derangement
                          ? rng.derangement(c.size())
                          : rng.permutation(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) report.permutation_applied[c[i]] = c[perm[i]];
    const std::vector<std::size_t> previous = sys.pairing;
    for (std::size_t n = 0; n < n_pairs; ++n) sys.pairing[n] = previous[report.permutation_applied[n]];
  }
  ++sys.t;
  return report;
}

Vector weighted_estimate(const ParticleSystem& sys, const std::function<Vector(const Vector&)>& phi) {
  const WeightVector w = sys.weights();
  Vector acc;
  for (std::size_t i = 0; i < sys.states.size(); ++i) {
    const Vector v = phi(sys.states[i]);
    if (!v.allFinite()) {
      throw std::domain_error("weighted_estimate: non-finite value at particle " + std::to_string(i));
    }
    if (i == 0) acc = Vector::Zero(v.size());
    acc += w[i] * v;
  }
  return acc;
}

DiagnosticRecord diagnostics(const ParticleSystem& sys, const std::vector<FDivergenceSpec>& specs,
                             std::size_t n_met, double cum_met_fraction) {
  const WeightVector w = sys.weights();
  DiagnosticRecord r;
  r.t = sys.t;
  r.ess = ess(w);
  r.n_met = n_met;
  r.cum_met_fraction = cum_met_fraction;
  const auto [lo, hi] = std::minmax_element(w.values().begin(), w.values().end());
  r.min_w = *lo;
  r.max_w = *hi;
  r.logsumexp_w = logsumexp(sys.log_w);
  r.bounds.reserve(specs.size());
  for (const auto& s : specs) r.bounds.push_back(empirical_f_divergence(s, w));
  return r;
}

double ess_after_merge(const WeightVector& w, std::size_t j, std::size_t k) {
  if (j == k || j >= w.size() || k >= w.size()) {
    throw std::invalid_argument("ess_after_merge: need two distinct valid indices");
  }
  const double e = ess(w);
  const double gap = w[j] - w[k];
  const double denom = 1.0 - e * gap * gap / 2.0;
  assert(denom > 0.0);
  return e / denom;
}

double ess_merge_kappa_bound(const WeightVector& w) {
  const double e = ess(w);
  const auto [lo, hi] = std::minmax_element(w.values().begin(), w.values().end());
  if (*lo == 0.0) return 2.0 * e;
  const double kappa = *hi / *lo;
  const double m = static_cast<double>(w.size());
  return e / (1.0 - (kappa - 1.0) * (kappa - 1.0) / (2.0 * (kappa * kappa + m - 1.0)));
}

double RunResult::acceptance_rate() const {
  return n_proposals == 0 ? 1.0 : static_cast<double>(n_accepted) / static_cast<double>(n_proposals);
}

RunResult run(ParticleSystem& sys, const CoupledKernel& kernel, const std::vector<FDivergenceSpec>& specs,
              std::uint64_t steps, const HarmonizerConfig& config, const StepObserver& observer) {
  sys.validate();
  RunResult result;
  result.trace.reserve(steps + 1);
  result.trace.push_back(diagnostics(sys, specs));
  if (observer) observer(sys, result.trace.back());
  std::uint64_t total_met = 0;
  const auto n_pairs = static_cast<double>(sys.n_pairs());
  for (std::uint64_t s = 0; s < steps; ++s) {
    const StepReport rep = harmonize_step(sys, kernel, config);
    total_met += rep.n_met;
    result.n_accepted += rep.n_accepted;
    result.n_proposals += rep.n_proposals;
    const double cum = static_cast<double>(total_met) / (n_pairs * static_cast<double>(s + 1));
    result.trace.push_back(diagnostics(sys, specs, rep.n_met, cum));
    if (observer) observer(sys, result.trace.back());
  }
  return result;
}

}  // namespace wharm
