#pragma once

// Batch experiments driven by a JSON config. See README.md for the schema and
// defaults. validate_config() returns every violation at once; run_experiment
// writes one trace CSV per (group, seed), an oracle CSV per group for the
// Gaussian AR(1) experiment, and summary.json.

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wharm/harmonizer.hpp"
#include "wharm/targets.hpp"

namespace wharm {

enum class ExitCode : int {
  ok = 0,
  runtime_error = 1,
  invalid_config = 2,
  unknown_experiment = 3,
  output_unwritable = 4,
  bad_input = 5,
};

inline const std::vector<std::string> kExperiments{"gaussian_ar1", "stochvol_mala", "synthetic",
                                                    "rwmh_gaussian"};

struct ExperimentConfig {
  std::string experiment;
  std::vector<std::size_t> n_pairs{64};
  std::uint64_t steps = 200;
  std::vector<std::uint64_t> seeds{1};
  std::vector<std::string> divergences{"chi2", "tv", "kl", "hellinger2"};
  ReshufflePolicy reshuffle_policy = ReshufflePolicy::derangement;
  int threads = 1;
  std::string output_dir = "out";

  // kernel
  std::vector<double> rho{0.9};        // gaussian_ar1
  double delta = 0.0;                  // rwmh_gaussian, stochvol_mala
  double p_c = 0.5;                    // synthetic
  std::string preconditioning = "identity";

  // target and initial distribution (Gaussian experiments)
  std::size_t dim = 10;
  double mu0_mean = 5.0;
  double mu0_variance = 2.0;

  // stochvol_mala
  StochVolParams stochvol{};
  std::size_t stochvol_l = 99;
  std::string observations;  // empty: simulate with data_seed
  std::uint64_t data_seed = 2025;
};

struct ValidationResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;
  bool unknown_experiment = false;

  bool ok() const { return errors.empty(); }
};

ValidationResult validate_config(const nlohmann::json& raw);
ValidationResult validate_config(const std::filesystem::path& path);
// Fully defaulted echo of a validated config.
nlohmann::json to_json(const ExperimentConfig& config);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::vector<std::string> errors, bool unknown_experiment);
  const std::vector<std::string>& errors() const { return errors_; }
  bool unknown_experiment() const { return unknown_experiment_; }

 private:
  std::vector<std::string> errors_;
  bool unknown_experiment_;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GroupResult {
  std::string label;
  std::optional<double> rho;
  std::size_t n_pairs = 0;
  std::vector<std::filesystem::path> trace_files;
  std::optional<std::filesystem::path> oracle_file;
  std::vector<RunResult> runs;  // one per seed
};

struct ExperimentOutcome {
  std::vector<GroupResult> groups;
  std::filesystem::path summary_file;
  double wall_clock_seconds = 0.0;
};

ExperimentOutcome run_experiment(const ExperimentConfig& config);

// "rho<rho>_N<n>" for gaussian_ar1, "N<n>" otherwise.
std::string group_label(const ExperimentConfig& config, double rho, std::size_t n_pairs);

// Oracle CSVs for every (rho, N) group of a gaussian_ar1 config, without running
// the sampler. Throws ConfigError for other experiments.
std::vector<std::filesystem::path> write_oracle_curves(const ExperimentConfig& config);

// Mean and sample standard deviation across seeds at each t, with +-2 SD bands.
struct Band {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> lower;
  std::vector<double> upper;
};
Band band_across_seeds(const std::vector<std::vector<double>>& per_seed);

// Writes oracle CSV: t,physical_time,chi2,kl,ess_star.
void write_oracle_csv(const std::filesystem::path& path, const GaussianSpec& mu0, double rho, double rho_max,
                      std::size_t m, int steps);

}  // namespace wharm
