// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wharm/couplings.hpp"
#include "wharm/experiment.hpp"
#include "wharm/harmonizer.hpp"
#include "wharm/oracle.hpp"
#include "wharm/simd.hpp"

using namespace wharm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<std::string> kFour{"chi2", "tv", "kl", "hellinger2"};

std::vector<FDivergenceSpec> specs_for(const std::vector<std::string>& names) {
  std::vector<FDivergenceSpec> out;
  for (const auto& n : names) out.push_back(spec_by_name(n));
  return out;
}

// Default gaussian_ar1 start, N(5 * 1, 2 I).
GaussianSpec ar1_mu0(Eigen::Index d, double mean = 5.0) {
  return GaussianSpec::isotropic(Vector::Constant(d, mean), 2.0);
}

RunResult gaussian_ar1_run(double rho, std::size_t n_pairs, std::uint64_t seed, std::uint64_t steps,
                           const StepObserver& observer = {}, double mu0_mean = 5.0) {
  const auto target = gaussian_target(GaussianSpec::standard(10));
  auto sys = init_system(ar1_mu0(10, mu0_mean), target, n_pairs, seed);
  const auto kernel = ar1_coupled(rho, 10);
  HarmonizerConfig cfg;
  cfg.seed = seed;
  return run(sys, *kernel, specs_for(kFour), steps, cfg, observer);
}

// 1. Bounds are non-increasing along a run.
Outcome monotone_bounds() {
  const auto r = gaussian_ar1_run(0.9, 64, 1, 200);
  double worst = -INFINITY;
  for (std::size_t t = 1; t < r.trace.size(); ++t) {
    for (std::size_t k = 0; k < kFour.size(); ++k) {
      worst = std::max(worst, r.trace[t].bounds[k] - r.trace[t - 1].bounds[k]);
    }
  }
  return {worst <= 1e-9, fmt("max increase bound_{t+1} - bound_t = %.3g over 200 steps x 4 divergences (limit 1e-9)", worst)};
}

// 2. Total weight is conserved by merges.
Outcome weight_conservation() {
  const auto r = gaussian_ar1_run(0.9, 64, 1, 200);
  const double l0 = r.trace.front().logsumexp_w;
  double drift = 0.0;
  for (const auto& rec : r.trace) drift = std::max(drift, std::abs(rec.logsumexp_w - l0) / std::abs(l0));
  return {drift < 1e-9, fmt("max relative drift of logsumexp(log_w) = %.3g (limit 1e-9)", drift)};
}

// 3. Closed-form ESS after one merge.
Outcome ess_merge_formula() {
  Stream rng({3, 0, kAuxLane});
  double worst_rel = 0.0;
  int below = 0, above = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> w(16);
    // Mix flat and heavy-tailed weight profiles.
    const double spread = 0.1 + 4.0 * rng.uniform();
    double s = 0;
    for (auto& x : w) s += (x = std::exp(spread * rng.standard_normal()));
    for (auto& x : w) x /= s;
    const auto before = WeightVector::normalized(w);
    const std::size_t j = rng.uniform_integer(16);
    const std::size_t k = (j + 1 + rng.uniform_integer(15)) % 16;
    const double predicted = ess_after_merge(before, j, k);
    auto merged = w;
    merged[j] = merged[k] = 0.5 * (w[j] + w[k]);
    const double recomputed = ess(WeightVector::normalized(merged));
    worst_rel = std::max(worst_rel, std::abs(predicted - recomputed) / recomputed);
    below += recomputed < ess(before);
    above += recomputed > 2.0 * ess(before);
  }
  return {worst_rel <= 1e-10 && below == 0 && above == 0,
          fmt("max relative error %.3g (limit 1e-10); post < pre in %d, post > 2 pre in %d of 1000", worst_rel,
              below, above)};
}

// 4. Reflection-maximal coupling meeting frequency.
Outcome meeting_probability() {
  const int n = 100000;
  const auto l = LowerFactor::identity(1);
  const Vector a = Vector::Zero(1), b = Vector::Ones(1);
  int met = 0;
  Stream rng({4, 0, kAuxLane});
  for (int i = 0; i < n; ++i) met += reflection_maximal_sample(a, b, l, rng).met;
  const double p = std::erfc(0.5 / std::sqrt(2.0));  // 2 Phi(-1/2)
  const double freq = met / double(n), se = std::sqrt(p * (1 - p) / n);
  return {std::abs(freq - p) <= 3 * se && std::abs(p - 0.61708) < 5e-6,
          fmt("frequency %.5f vs 2Phi(-0.5) = %.5f, |diff| = %.2f SE (limit 3)", freq, p, std::abs(freq - p) / se)};
}

// 5. Each coupled marginal equals the single-chain kernel.
Outcome marginal_fidelity() {
  Matrix cov(3, 3);
  cov << 1.0, 0.4, 0.1, 0.4, 1.2, -0.3, 0.1, -0.3, 0.8;
  const auto factor = LowerFactor::from_covariance(cov);
  const auto target = gaussian_target(GaussianSpec(Vector::Zero(3), factor));
  const std::vector<std::pair<Vector, Vector>> pairs{
      {Vector::Zero(3), Vector::Constant(3, 0.5)},
      {(Vector(3) << 1.0, -1.0, 0.5).finished(), (Vector(3) << -0.5, 0.8, 0.0).finished()},
      {(Vector(3) << 2.0, 2.0, -2.0).finished(), (Vector(3) << 2.1, 1.9, -2.0).finished()}};
  const int n = 100000;
  double worst = 0.0;
  std::string where;
  std::uint64_t lane = 0;
  for (const KernelParams& params : {KernelParams{Ar1Params{0.8}}, KernelParams{RwmhParams{0.7}},
                                     KernelParams{MalaParams{0.5}}}) {
    const auto kernel = make_kernel(params, target, factor);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto& [x, y] = pairs[p];
      Stream coupled({5, 0, lane++}), single({5, 1, lane++});
      Eigen::ArrayXd s1 = Eigen::ArrayXd::Zero(3), s2 = s1, q1 = s1, q2 = s1, f1 = s1, f2 = s1;
      for (int i = 0; i < n; ++i) {
        const Eigen::ArrayXd a = kernel->step(x, y, coupled).x.array();
        const Eigen::ArrayXd b = kernel->single_step(x, single).array();
        s1 += a;
        s2 += b;
        q1 += a * a;
        q2 += b * b;
        f1 += a * a * a * a;
        f2 += b * b * b * b;
      }
      for (int c = 0; c < 3; ++c) {
        const double m1 = s1[c] / n, m2 = s2[c] / n, e1 = q1[c] / n, e2 = q2[c] / n;
        const double se_mean = std::sqrt((e1 - m1 * m1 + e2 - m2 * m2) / n);
        const double se_second = std::sqrt((f1[c] / n - e1 * e1 + f2[c] / n - e2 * e2) / n);
        const double z = std::max(std::abs(m1 - m2) / se_mean, std::abs(e1 - e2) / se_second);
        if (z > worst) {
          worst = z;
          where = fmt("%s pair %zu coord %d", std::string(kernel->name()).c_str(), p, c);
        }
      }
    }
  }
  return {worst <= 4.0, fmt("largest moment gap %.2f SE at %s (limit 4 SE; 3 kernels x 3 pairs x 3 coords x 2 moments, 1e5 transitions)",
                            worst, where.c_str())};
}

// 6. Empirical chi2 bound vs the exact chi2 of the chain law; ESS monotone and saturating.
Outcome ar1_sweep_desk_scale() {
  const std::vector<double> rhos{0.9, 0.99};
  const std::vector<std::size_t> ns{16, 64, 256};
  const std::uint64_t steps = 200;
  std::size_t cells = 0, covered = 0, attainable = 0;
  double worst_ess_drop = 0.0;
  bool saturates = true;
  std::string breakdown;
  for (double rho : rhos) {
    for (std::size_t n : ns) {
      const auto oracle = oracle_curve(ar1_mu0(10), rho, 2 * n, static_cast<int>(steps));
      std::size_t group_cells = 0, group_covered = 0, group_attainable = 0;
      double final_ess = 0.0, mid_ess = 0.0;
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto r = gaussian_ar1_run(rho, n, seed, steps);
        for (std::size_t t = 0; t < r.trace.size(); ++t) {
          ++group_cells;
          group_covered += r.trace[t].bounds[0] >= oracle[t].chi2;
          group_attainable += oracle[t].chi2 <= 2.0 * n - 1.0;
          if (t > 0) worst_ess_drop = std::max(worst_ess_drop, r.trace[t - 1].ess - r.trace[t].ess);
        }
        final_ess += r.trace.back().ess / 10.0;
        mid_ess += r.trace[steps / 2].ess / 10.0;
      }
      // Saturation: where the oracle ESS* is within 1% of 2N at T, the seed-averaged
      // empirical ESS must reach 80% of 2N and its gap to 2N must still be closing.
      const double m = 2.0 * n;
      if (oracle.back().ess_star >= 0.99 * m && (final_ess < 0.8 * m || m - final_ess >= m - mid_ess)) {
        saturates = false;
      }
      if (n >= 64) {
        cells += group_cells;
        covered += group_covered;
        attainable += group_attainable;
      }
      breakdown += fmt("\n        rho=%-4g N=%-3zu covered %5.1f%% of cells (oracle chi2 <= 2N-1 in %5.1f%%), "
                       "mean final ESS %.1f / %g, oracle ESS* %.1f",
                       rho, n, 100.0 * group_covered / group_cells, 100.0 * group_attainable / group_cells,
                       final_ess, m, oracle.back().ess_star);
    }
  }
  const double coverage = double(covered) / cells;
  const bool pass = coverage >= 0.95 && worst_ess_drop <= 1e-9 && saturates;
  return {pass, fmt("chi2 coverage for N>=64: %.1f%% (need >= 95%%; the bound never exceeds 2N-1, which caps it at %.1f%%); "
                    "max ESS decrease %.3g (limit 1e-9); ESS approaches 2N where ESS* does: %s",
                    100 * coverage, 100.0 * attainable / cells, worst_ess_drop, saturates ? "yes" : "no") +
                    breakdown};
}

// 7. Mean-square homogenization rate of the weights under the synthetic coupler.
Outcome exponential_homogenization() {
  const std::size_t n_pairs = 128, m = 2 * n_pairs;
  const int reps = 200;
  const std::vector<int> checkpoints{10, 20, 40};
  const auto target = gaussian_target(GaussianSpec::standard(2));
  const auto mu0 = GaussianSpec::isotropic(Vector::Constant(2, 1.0), 2.0);
  bool pass = true;
  std::string detail;
  for (double p_c : {0.3, 0.7}) {
    const auto kernel = synthetic_coupler(p_c, 2);
    std::vector<double> v(41, 0.0);
    for (int rep = 0; rep < reps; ++rep) {
      const std::uint64_t seed = 7000 + rep;
      auto sys = init_system(mu0, target, n_pairs, seed);
      HarmonizerConfig cfg;
      cfg.seed = seed;
      cfg.reshuffle_policy = ReshufflePolicy::uniform_permutation;
      run(sys, *kernel, {}, 40, cfg, [&](const ParticleSystem& s, const DiagnosticRecord& r) {
        const auto w = s.weights();
        double acc = 0.0;
        for (double x : w.values()) acc += (x - 1.0 / m) * (x - 1.0 / m);
        v[r.t] += acc / reps;
      });
    }
    const double rho = 1.0 - p_c * p_c * p_c / 4.0;
    detail += fmt(" p_c=%.1f:", p_c);
    for (int t : checkpoints) {
      const double bound = v[0] * std::pow(rho, t / 2 - 1);
      pass = pass && v[t] <= bound;
      detail += fmt(" V_%d/bound=%.2e", t, v[t] / bound);
    }
  }
  return {pass, "mean V_t <= V_0 rho^(floor(t/2)-1), 200 reps, N=128;" + detail};
}

// 8. Weighted mean estimates are consistent as N grows.
struct ConsistencyRun {
  std::vector<double> rmse;
  double bias_se_512 = 0.0;
  bool decreasing = true;
  std::string sequence;
};

ConsistencyRun consistency_run(double mu0_mean) {
  const std::vector<std::size_t> ns{32, 64, 128, 256, 512};
  const int reps = 20;
  ConsistencyRun out;
  for (std::size_t n : ns) {
    double sq = 0.0;
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(10), sum2 = sum;
    for (int rep = 0; rep < reps; ++rep) {
      Vector est;
      gaussian_ar1_run(
          0.9, n, 800 + rep, 20,
          [&](const ParticleSystem& s, const DiagnosticRecord& r) {
            if (r.t == 20) est = weighted_estimate(s, [](const Vector& x) { return x; });
          },
          mu0_mean);
      sq += est.squaredNorm() / reps;
      sum += est.array();
      sum2 += est.array().square();
    }
    out.rmse.push_back(std::sqrt(sq));
    if (n == 512) {
      const Eigen::ArrayXd mean = sum / reps;
      const Eigen::ArrayXd sd = ((sum2 - reps * mean.square()) / (reps - 1)).sqrt();
      out.bias_se_512 = (mean.abs() / (sd / std::sqrt(double(reps)))).maxCoeff();
    }
  }
  for (std::size_t i = 0; i < out.rmse.size(); ++i) {
    if (i > 0 && !(out.rmse[i] < out.rmse[i - 1])) out.decreasing = false;
    out.sequence += fmt("%s%.4f", i ? " > " : "", out.rmse[i]);
  }
  return out;
}

Outcome consistency() {
  const auto main_run = consistency_run(5.0);
  // Informational only: the same protocol from a start whose importance weights
  // are not degenerate at t = 0.
  const auto mild = consistency_run(1.0);
  return {main_run.decreasing && main_run.bias_se_512 <= 5.0,
          fmt("rho=0.9, mu0=N(5*1, 2I), t=20, 20 reps: RMSE of E[x] for N=32..512: %s (strictly decreasing: %s); "
              "N=512 bias %.2f SE (limit 5)"
              "\n        info, not scored: mu0=N(1*1, 2I) gives %s (strictly decreasing: %s), N=512 bias %.2f SE",
              main_run.sequence.c_str(), main_run.decreasing ? "yes" : "no", main_run.bias_se_512,
              mild.sequence.c_str(), mild.decreasing ? "yes" : "no", mild.bias_se_512)};
}

// 9. Closed-form oracle vs quadrature, tensorization and semigroup.
Outcome oracle_self_consistency() {
  Stream rng({9, 0, kAuxLane});
  auto g1 = [](double m, double v) { return GaussianMarginal(Vector::Constant(1, m), Matrix::Constant(1, 1, v)); };
  double worst_quad = 0.0;
  for (int pair = 0; pair < 10;) {
    const auto p = g1(2 * rng.standard_normal(), 0.5 + 2.5 * rng.uniform());
    const auto q = g1(2 * rng.standard_normal(), 0.5 + 2.5 * rng.uniform());
    const double c = gaussian_chi2(p, q);
    if (!std::isfinite(c) || c > 1e6) continue;
    ++pair;
    const double cq = quadrature_f_divergence_1d(spec_by_name("chi2"), p, q);
    const double k = gaussian_kl(p, q);
    const double kq = quadrature_f_divergence_1d(spec_by_name("kl"), p, q);
    worst_quad = std::max({worst_quad, std::abs(c - cq) / std::max(1.0, std::abs(c)),
                           std::abs(k - kq) / std::max(1.0, std::abs(k))});
  }

  Vector mp(3), mq(3), vp(3), vq(3);
  for (int i = 0; i < 3; ++i) {
    mp[i] = rng.standard_normal();
    mq[i] = rng.standard_normal();
    vp[i] = 0.7 + rng.uniform();
    vq[i] = 0.9 + rng.uniform();
  }
  double product = 1.0;
  for (int i = 0; i < 3; ++i) {
    product *= 1.0 + quadrature_f_divergence_1d(spec_by_name("chi2"), g1(mp[i], vp[i]), g1(mq[i], vq[i]));
  }
  const double joint = 1.0 + gaussian_chi2(GaussianMarginal(mp, vp.asDiagonal().toDenseMatrix()),
                                           GaussianMarginal(mq, vq.asDiagonal().toDenseMatrix()));
  const double tensor_err = std::abs(joint - product) / product;

  double semigroup_err = 0.0;
  Matrix a(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = 0.5 * rng.standard_normal();
  const GaussianMarginal start(Vector::Constant(4, 3.0), a * a.transpose() + Matrix::Identity(4, 4));
  for (double rho : {0.5, 0.9, 0.99}) {
    for (auto [t, s] : {std::pair{1, 2}, std::pair{5, 5}, std::pair{40, 60}}) {
      const auto direct = gaussian_marginal_t(start, rho, t + s);
      const auto split = gaussian_marginal_t(gaussian_marginal_t(start, rho, t), rho, s);
      semigroup_err = std::max({semigroup_err, (direct.mean - split.mean).cwiseAbs().maxCoeff(),
                                (direct.cov - split.cov).cwiseAbs().maxCoeff()});
    }
  }
  return {worst_quad <= 1e-6 && tensor_err <= 1e-8 && semigroup_err <= 1e-10,
          fmt("closed form vs quadrature %.2g (limit 1e-6); tensorization d=3 %.2g (limit 1e-8); semigroup %.2g (limit 1e-10)",
              worst_quad, tensor_err, semigroup_err)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Thread count does not change the output.
Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "wharm_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::size_t files = 0, identical = 0;
  for (const char* experiment : {"gaussian_ar1", "rwmh_gaussian", "synthetic", "stochvol_mala"}) {
    nlohmann::json cfg{{"experiment", experiment}, {"steps", 60}, {"n_pairs", 32}, {"seeds", {1, 2}}};
    if (std::string(experiment) == "stochvol_mala") cfg["target"] = {{"L", 29}};
    std::vector<std::filesystem::path> dirs;
    for (int threads : {1, 8}) {
      dirs.push_back(root / fmt("%s_t%d", experiment, threads));
      cfg["threads"] = threads;
      cfg["output_dir"] = dirs.back().string();
      run_experiment(*validate_config(cfg).config);
    }
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename().string();
      if (name.rfind("trace_", 0) != 0) continue;
      ++files;
      identical += slurp(entry.path()) == slurp(dirs[1] / name);
    }
  }
  std::filesystem::remove_all(root);
  return {files > 0 && identical == files,
          fmt("%zu of %zu trace CSVs bit-identical between 1 and 8 threads (4 experiments x 2 seeds)", identical, files)};
}

// 11. Stochastic volatility with Laplace-preconditioned MALA.
Outcome stochvol_desk_scale() {
  const auto res = validate_config(nlohmann::json{
      {"experiment", "stochvol_mala"}, {"n_pairs", 32}, {"steps", 500}, {"divergences", {"chi2"}},
      {"output_dir", (std::filesystem::temp_directory_path() / "wharm_acceptance_stochvol").string()}});
  const auto& cfg = *res.config;
  const auto outcome = run_experiment(cfg);
  std::filesystem::remove_all(cfg.output_dir);
  const auto& r = outcome.groups.at(0).runs.at(0);
  double drop = 0.0;
  for (std::size_t t = 1; t < r.trace.size(); ++t) drop = std::max(drop, r.trace[t - 1].ess - r.trace[t].ess);
  const double acc = r.acceptance_rate();
  const double e0 = r.trace.front().ess, e1 = r.trace.back().ess;
  return {acc >= 0.3 && acc <= 0.8 && drop <= 1e-9 && e1 > e0,
          fmt("L=99, N=32, T=500, delta=%.4f: acceptance %.3f (band [0.3, 0.8]); max ESS decrease %.3g; ESS %.2f -> %.2f",
              cfg.delta, acc, drop, e0, e1)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "monotone divergence bounds", 10, monotone_bounds},
      {2, "weight-sum conservation", 10, weight_conservation},
      {3, "ESS merge formula", 10, ess_merge_formula},
      {4, "reflection-maximal meeting probability", 5, meeting_probability},
      {5, "marginal fidelity of coupled kernels", 120, marginal_fidelity},
      {6, "chi2 bound vs oracle, ESS curves (desk scale)", 120, ar1_sweep_desk_scale},
      {7, "exponential homogenization", 60, exponential_homogenization},
      {8, "consistency of weighted estimates", 120, consistency},
      {9, "oracle self-consistency", 60, oracle_self_consistency},
      {10, "determinism across thread counts", 120, determinism},
      {11, "stochastic volatility desk-scale", 300, stochvol_desk_scale},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  std::printf("simd backend: %s\n", std::string(simd::name(simd::active())).c_str());
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs <= c.budget_seconds;
    const bool pass = o.pass && in_budget;
    failed += !pass;
    std::printf("%s %2d  %s: %s [%.2f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs, c.budget_seconds, in_budget ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d criterion(s) failed\n", failed);
  return failed ? 1 : 0;
}
