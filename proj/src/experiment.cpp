#include "wharm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <set>

#include "wharm/oracle.hpp"
#include "wharm/simd.hpp"
#include "wharm/trace_io.hpp"

namespace wharm {
namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Reads typed fields from a JSON object and accumulates every problem.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string prefix, std::vector<std::string>& errors)
      : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {}

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key) || obj_.at(key).is_null()) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      error(key, "has the wrong type");
    }
  }

  // Accepts a scalar or a list.
  template <class T>
  void read_list(const char* key, std::vector<T>& out) {
    seen_.insert(key);
    if (!obj_.contains(key) || obj_.at(key).is_null()) return;
    try {
      const json& v = obj_.at(key);
      out = v.is_array() ? v.get<std::vector<T>>() : std::vector<T>{v.get<T>()};
    } catch (const json::exception&) {
      error(key, "has the wrong type");
    }
  }

  void mark(const char* key) { seen_.insert(key); }

  void reject_unknown() {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.contains(k)) error(k.c_str(), "is not a recognized field");
    }
  }

  void error(const char* key, const std::string& what) { errors_.push_back(prefix_ + key + " " + what); }

 private:
  const json& obj_;
  std::string prefix_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

const json& section(const json& raw, const char* key, std::vector<std::string>& errors) {
  static const json empty = json::object();
  if (!raw.contains(key) || raw.at(key).is_null()) return empty;
  if (!raw.at(key).is_object()) {
    errors.push_back(std::string(key) + " must be an object");
    return empty;
  }
  return raw.at(key);
}

double stochvol_default_delta(std::size_t l) { return 2.89 * std::pow(static_cast<double>(l + 1), -1.0 / 3.0); }

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors, bool unknown_experiment)
    : std::runtime_error("invalid config: " + join(errors)),
      errors_(std::move(errors)),
      unknown_experiment_(unknown_experiment) {}

ValidationResult validate_config(const json& raw) {
  ValidationResult res;
  auto& errors = res.errors;
  if (!raw.is_object()) {
    errors.push_back("config must be a JSON object");
    return res;
  }
  ExperimentConfig c;
  FieldReader top(raw, "", errors);
  top.read("experiment", c.experiment);
  std::string policy = std::string(to_string(c.reshuffle_policy));
  top.read_list("n_pairs", c.n_pairs);
  top.read("steps", c.steps);
  top.read_list("seeds", c.seeds);
  top.read_list("divergences", c.divergences);
  top.read("reshuffle_policy", policy);
  top.read("threads", c.threads);
  top.read("output_dir", c.output_dir);
  top.mark("kernel");
  top.mark("target");
  top.reject_unknown();

  if (c.experiment.empty()) {
    errors.push_back("experiment is required (one of: " + join(kExperiments) + ")");
  } else if (std::find(kExperiments.begin(), kExperiments.end(), c.experiment) == kExperiments.end()) {
    errors.push_back("unknown experiment '" + c.experiment + "' (expected one of: " + join(kExperiments) + ")");
    res.unknown_experiment = true;
  }
  const bool stochvol = c.experiment == "stochvol_mala";

  // experiment-specific defaults, overridden below by explicit fields
  if (c.experiment == "synthetic") {
    c.dim = 2;
    c.mu0_mean = 1.0;
  }
  if (stochvol) c.preconditioning = "laplace";

  const json& kernel = section(raw, "kernel", errors);
  FieldReader kr(kernel, "kernel.", errors);
  if (c.experiment == "gaussian_ar1") kr.read_list("rho", c.rho);
  if (c.experiment == "rwmh_gaussian" || stochvol) {
    kr.read("delta", c.delta);
    kr.read("preconditioning", c.preconditioning);
  }
  if (c.experiment == "synthetic") kr.read("p_c", c.p_c);
  if (!res.unknown_experiment) kr.reject_unknown();

  const json& target = section(raw, "target", errors);
  FieldReader tr(target, "target.", errors);
  if (stochvol) {
    tr.read("beta", c.stochvol.beta);
    tr.read("phi", c.stochvol.phi);
    tr.read("sigma", c.stochvol.sigma);
    tr.read("L", c.stochvol_l);
    tr.read("observations", c.observations);
    tr.read("data_seed", c.data_seed);
  } else {
    tr.read("dim", c.dim);
    tr.read("mu0_mean", c.mu0_mean);
    tr.read("mu0_variance", c.mu0_variance);
  }
  if (!res.unknown_experiment) tr.reject_unknown();

  // value checks
  if (c.n_pairs.empty()) errors.push_back("n_pairs must not be empty");
  for (auto n : c.n_pairs) {
    if (n < 1) errors.push_back("n_pairs must be >= 1 (got " + std::to_string(n) + ")");
  }
  if (c.seeds.empty()) errors.push_back("seeds must not be empty");
  if (c.threads < 1) errors.push_back("threads must be >= 1");
  if (c.output_dir.empty()) errors.push_back("output_dir must not be empty");
  for (const auto& name : c.divergences) {
    try {
      (void)spec_by_name(name);
    } catch (const std::invalid_argument& e) {
      errors.push_back(std::string("divergences: ") + e.what());
    }
  }
  try {
    c.reshuffle_policy = parse_reshuffle_policy(policy);
  } catch (const std::invalid_argument& e) {
    errors.push_back(std::string("reshuffle_policy: ") + e.what());
  }
  if (c.experiment == "gaussian_ar1") {
    if (c.rho.empty()) errors.push_back("kernel.rho must not be empty");
    for (double r : c.rho) {
      if (!(r > 0.0 && r < 1.0)) errors.push_back("kernel.rho must lie in (0, 1) (got " + format_g(r) + ")");
    }
  }
  if (c.experiment == "synthetic" && !(c.p_c > 0.0 && c.p_c <= 1.0)) {
    errors.push_back("kernel.p_c must lie in (0, 1]");
  }
  if (stochvol) {
    if (c.delta == 0.0) c.delta = stochvol_default_delta(c.stochvol_l);
    if (!(c.stochvol.beta > 0.0)) errors.push_back("target.beta must be positive");
    if (!(c.stochvol.sigma > 0.0)) errors.push_back("target.sigma must be positive");
    if (!(std::abs(c.stochvol.phi) < 1.0)) errors.push_back("target.phi must satisfy |phi| < 1");
    if (c.stochvol_l < 1) errors.push_back("target.L must be >= 1");
  } else {
    if (c.dim < 1) errors.push_back("target.dim must be >= 1");
    if (!(c.mu0_variance > 0.0)) errors.push_back("target.mu0_variance must be positive");
    if (c.experiment == "rwmh_gaussian" && c.delta == 0.0 && c.dim >= 1) {
      c.delta = 2.38 * 2.38 / static_cast<double>(c.dim);
    }
  }
  if (c.experiment == "rwmh_gaussian" || stochvol) {
    if (!(c.delta > 0.0)) errors.push_back("kernel.delta must be positive");
    if (c.preconditioning != "identity" && c.preconditioning != "laplace") {
      errors.push_back("kernel.preconditioning must be 'identity' or 'laplace'");
    }
  }
  if (errors.empty()) res.config = std::move(c);
  return res;
}

ValidationResult validate_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    ValidationResult r;
    r.errors.push_back("cannot open config file " + path.string());
    return r;
  }
  try {
    return validate_config(json::parse(in));
  } catch (const json::parse_error& e) {
    ValidationResult r;
    r.errors.push_back(std::string("config is not valid JSON: ") + e.what());
    return r;
  }
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["n_pairs"] = c.n_pairs;
  j["steps"] = c.steps;
  j["seeds"] = c.seeds;
  j["divergences"] = c.divergences;
  j["reshuffle_policy"] = std::string(to_string(c.reshuffle_policy));
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir;
  json k = json::object();
  json t = json::object();
  if (c.experiment == "gaussian_ar1") k["rho"] = c.rho;
  if (c.experiment == "rwmh_gaussian" || c.experiment == "stochvol_mala") {
    k["delta"] = c.delta;
    k["preconditioning"] = c.preconditioning;
  }
  if (c.experiment == "synthetic") k["p_c"] = c.p_c;
  if (c.experiment == "stochvol_mala") {
    t["beta"] = c.stochvol.beta;
    t["phi"] = c.stochvol.phi;
    t["sigma"] = c.stochvol.sigma;
    t["L"] = c.stochvol_l;
    t["observations"] = c.observations.empty() ? json(nullptr) : json(c.observations);
    t["data_seed"] = c.data_seed;
  } else {
    t["dim"] = c.dim;
    t["mu0_mean"] = c.mu0_mean;
    t["mu0_variance"] = c.mu0_variance;
  }
  j["kernel"] = k;
  j["target"] = t;
  return j;
}

Band band_across_seeds(const std::vector<std::vector<double>>& per_seed) {
  Band b;
  if (per_seed.empty()) return b;
  const std::size_t len = per_seed.front().size();
  const auto k = static_cast<double>(per_seed.size());
  for (std::size_t t = 0; t < len; ++t) {
    double mean = 0.0;
    for (const auto& s : per_seed) mean += s.at(t);
    mean /= k;
    double ss = 0.0;
    for (const auto& s : per_seed) ss += (s[t] - mean) * (s[t] - mean);
    const double sd = per_seed.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
    b.mean.push_back(mean);
    b.sd.push_back(sd);
    b.lower.push_back(mean - 2.0 * sd);
    b.upper.push_back(mean + 2.0 * sd);
  }
  return b;
}

void write_oracle_csv(const std::filesystem::path& path, const GaussianSpec& mu0, double rho, double rho_max,
                      std::size_t m, int steps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  const double scale = std::log(rho) / std::log(rho_max);
  out << "t,physical_time,chi2,kl,ess_star\n";
  for (const auto& r : oracle_curve(mu0, rho, m, steps)) {
    out << r.t << ',' << format_real(r.t * scale) << ',' << format_real(r.chi2) << ',' << format_real(r.kl)
        << ',' << format_real(r.ess_star) << '\n';
  }
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json band_json(const Band& b) {
  json j;
  for (const auto* key : {"mean", "sd", "lower", "upper"}) j[key] = json::array();
  for (std::size_t i = 0; i < b.mean.size(); ++i) {
    j["mean"].push_back(finite_or_null(b.mean[i]));
    j["sd"].push_back(finite_or_null(b.sd[i]));
    j["lower"].push_back(finite_or_null(b.lower[i]));
    j["upper"].push_back(finite_or_null(b.upper[i]));
  }
  return j;
}

json record_json(const DiagnosticRecord& r, const std::vector<std::string>& names) {
  json j;
  j["t"] = r.t;
  j["ess"] = r.ess;
  j["n_met"] = r.n_met;
  j["cum_met_fraction"] = r.cum_met_fraction;
  j["min_w"] = r.min_w;
  j["max_w"] = r.max_w;
  j["logsumexp_w"] = r.logsumexp_w;
  json bounds = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) bounds[names[i]] = finite_or_null(r.bounds[i]);
  j["bounds"] = bounds;
  return j;
}

std::vector<double> row_values(const DiagnosticRecord& r) {
  std::vector<double> v{static_cast<double>(r.t), r.ess, static_cast<double>(r.n_met), r.cum_met_fraction,
                        r.min_w, r.max_w, r.logsumexp_w};
  v.insert(v.end(), r.bounds.begin(), r.bounds.end());
  return v;
}

GaussianSpec gaussian_mu0(const ExperimentConfig& c) {
  const auto d = static_cast<Eigen::Index>(c.dim);
  return GaussianSpec::isotropic(Vector::Constant(d, c.mu0_mean), c.mu0_variance);
}

struct Problem {
  TargetModel target;
  GaussianSpec mu0;
  LowerFactor precond;
};

Problem build_problem(const ExperimentConfig& c, const std::filesystem::path& out_dir) {
  if (c.experiment == "stochvol_mala") {
    StochVolSpec spec;
    spec.params = c.stochvol;
    if (!c.observations.empty()) {
      spec.y = read_observations_csv(c.observations);
    } else {
      Stream rng({c.data_seed, 0, kAuxLane});
      spec.y = stochvol_simulate(c.stochvol, c.stochvol_l, rng).y;
    }
    write_observations_csv(out_dir / "observations.csv", spec.y);
    TargetModel target = stochvol_target(spec);
    const auto d = static_cast<Eigen::Index>(target.dim);
    GaussianSpec laplace = laplace_approx(target, Vector::Zero(d));
    LowerFactor precond = c.preconditioning == "laplace" ? laplace.cov_factor : LowerFactor::identity(d);
    return {std::move(target), laplace, precond};
  }
  const auto d = static_cast<Eigen::Index>(c.dim);
  return {gaussian_target(GaussianSpec::standard(d)), gaussian_mu0(c), LowerFactor::identity(d)};
}

KernelParams kernel_params(const ExperimentConfig& c, double rho) {
  if (c.experiment == "gaussian_ar1") return Ar1Params{rho};
  if (c.experiment == "synthetic") return SyntheticParams{c.p_c};
  if (c.experiment == "rwmh_gaussian") return RwmhParams{c.delta};
  return MalaParams{c.delta};
}

void prepare_output_dir(const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw OutputError("cannot create output directory " + out_dir.string());
  }
  const auto probe = out_dir / ".write_probe";
  std::ofstream p(probe);
  if (!p) throw OutputError("output directory is not writable: " + out_dir.string());
  p.close();
  std::filesystem::remove(probe, ec);
}

}  // namespace

std::string group_label(const ExperimentConfig& c, double rho, std::size_t n_pairs) {
  return (c.experiment == "gaussian_ar1" ? "rho" + format_g(rho) + "_" : std::string()) + "N" +
         std::to_string(n_pairs);
}

std::vector<std::filesystem::path> write_oracle_curves(const ExperimentConfig& c) {
  if (c.experiment != "gaussian_ar1") {
    throw ConfigError({"oracle curves are available only for gaussian_ar1 (got '" + c.experiment + "')"}, false);
  }
  const std::filesystem::path out_dir(c.output_dir);
  prepare_output_dir(out_dir);
  const double rho_max = *std::max_element(c.rho.begin(), c.rho.end());
  std::vector<std::filesystem::path> files;
  for (double rho : c.rho) {
    for (std::size_t n : c.n_pairs) {
      files.push_back(out_dir / ("oracle_" + group_label(c, rho, n) + ".csv"));
      write_oracle_csv(files.back(), gaussian_mu0(c), rho, rho_max, 2 * n, static_cast<int>(c.steps));
    }
  }
  return files;
}

ExperimentOutcome run_experiment(const ExperimentConfig& c) {
  const auto started = std::chrono::steady_clock::now();
  const std::filesystem::path out_dir(c.output_dir);
  prepare_output_dir(out_dir);

  std::vector<FDivergenceSpec> specs;
  for (const auto& n : c.divergences) specs.push_back(spec_by_name(n));
  const Problem problem = build_problem(c, out_dir);
  const std::vector<std::string> cols = trace_columns(c.divergences);

  const bool ar1 = c.experiment == "gaussian_ar1";
  const std::vector<double> rhos = ar1 ? c.rho : std::vector<double>{0.0};
  const double rho_max = ar1 ? *std::max_element(rhos.begin(), rhos.end()) : 0.0;

  ExperimentOutcome outcome;
  json groups = json::array();
  for (double rho : rhos) {
    const auto kernel = make_kernel(kernel_params(c, rho), problem.target, problem.precond);
    for (std::size_t n_pairs : c.n_pairs) {
      GroupResult g;
      g.n_pairs = n_pairs;
      g.label = group_label(c, rho, n_pairs);
      if (ar1) g.rho = rho;
      for (std::uint64_t seed : c.seeds) {
        HarmonizerConfig hc;
        hc.seed = seed;
        hc.reshuffle_policy = c.reshuffle_policy;
        hc.threads = c.threads;
        ParticleSystem sys = init_system(problem.mu0, problem.target, n_pairs, seed, c.threads);
        RunResult r = run(sys, *kernel, specs, c.steps, hc);
        const auto path = out_dir / ("trace_" + g.label + "_seed" + std::to_string(seed) + ".csv");
        try {
          write_trace_csv(path, c.divergences, r.trace);
        } catch (const std::runtime_error& e) {
          throw OutputError(e.what());
        }
        g.trace_files.push_back(path);
        g.runs.push_back(std::move(r));
      }
      if (ar1) {
        g.oracle_file = out_dir / ("oracle_" + g.label + ".csv");
        write_oracle_csv(*g.oracle_file, problem.mu0, rho, rho_max, 2 * n_pairs, static_cast<int>(c.steps));
      }

      json gj;
      gj["label"] = g.label;
      gj["rho"] = g.rho ? json(*g.rho) : json(nullptr);
      gj["n_pairs"] = n_pairs;
      if (ar1) gj["physical_time_scale"] = std::log(rho) / std::log(rho_max);
      gj["seeds"] = c.seeds;
      gj["trace_files"] = json::array();
      for (const auto& p : g.trace_files) gj["trace_files"].push_back(p.filename().string());
      gj["oracle_file"] = g.oracle_file ? json(g.oracle_file->filename().string()) : json(nullptr);
      gj["acceptance_rate"] = json::array();
      gj["final"] = json::array();
      for (const auto& r : g.runs) {
        gj["acceptance_rate"].push_back(r.acceptance_rate());
        gj["final"].push_back(record_json(r.trace.back(), c.divergences));
      }
      json bands = json::object();
      for (std::size_t col = 1; col < cols.size(); ++col) {
        std::vector<std::vector<double>> per_seed;
        for (const auto& r : g.runs) {
          std::vector<double> series;
          for (const auto& rec : r.trace) series.push_back(row_values(rec)[col]);
          per_seed.push_back(std::move(series));
        }
        bands[cols[col]] = band_json(band_across_seeds(per_seed));
      }
      gj["bands"] = bands;
      groups.push_back(std::move(gj));
      outcome.groups.push_back(std::move(g));
    }
  }

  outcome.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json summary;
  summary["schema_version"] = 1;
  summary["config"] = to_json(c);
  summary["simd_backend"] = std::string(simd::name(simd::active()));
  summary["wall_clock_seconds"] = outcome.wall_clock_seconds;
  summary["groups"] = std::move(groups);
  outcome.summary_file = out_dir / "summary.json";
  std::ofstream out(outcome.summary_file);
  if (!out) throw OutputError("cannot write " + outcome.summary_file.string());
  out << summary.dump(2) << '\n';
  return outcome;
}

}  // namespace wharm
