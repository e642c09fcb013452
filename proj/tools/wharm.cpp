// wharm: batch front-end for weight-harmonization experiments.
//
//   wharm run      --config cfg.json [--out DIR] [--seeds 1,2,3] [--threads N] [--log-scale] [--no-plots]
//   wharm plot     --out DIR [--oracle oracle.csv] [--log-scale] trace.csv...
//   wharm validate --config cfg.json
//   wharm oracle   --config cfg.json [--out DIR]

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "wharm/experiment.hpp"
#include "wharm/plot.hpp"

namespace {

using wharm::ExitCode;

int code(ExitCode c) { return static_cast<int>(c); }

struct Overrides {
  std::string config;
  std::string out;
  std::vector<std::uint64_t> seeds;
  int threads = 0;
};

// Loads and validates the config, applying command-line overrides before validation.
wharm::ExperimentConfig load(const Overrides& o) {
  std::ifstream in(o.config);
  if (!in) throw wharm::ConfigError({"cannot open config file " + o.config}, false);
  nlohmann::json raw;
  try {
    raw = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw wharm::ConfigError({std::string("config is not valid JSON: ") + e.what()}, false);
  }
  if (raw.is_object()) {
    if (!o.out.empty()) raw["output_dir"] = o.out;
    if (!o.seeds.empty()) raw["seeds"] = o.seeds;
    if (o.threads > 0) raw["threads"] = o.threads;
  }
  auto res = wharm::validate_config(raw);
  if (!res.ok()) throw wharm::ConfigError(res.errors, res.unknown_experiment);
  return *res.config;
}

void warn_dropped(const wharm::PlotReport& report) {
  for (const auto& f : report.files) {
    if (f.dropped_points > 0) {
      std::cerr << "warning: " << f.path.string() << ": dropped " << f.dropped_points
                << " non-finite or non-positive point(s)\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weight harmonization for coupled MCMC: experiments, traces, plots and oracle curves"};
  app.require_subcommand(1);

  Overrides ov;
  bool log_scale = false;
  bool no_plots = false;

  auto* run = app.add_subcommand("run", "run an experiment and write traces, summary.json and plots");
  run->add_option("--config", ov.config, "experiment config (JSON)")->required();
  run->add_option("--out", ov.out, "output directory (overrides output_dir)");
  run->add_option("--seeds", ov.seeds, "comma-separated seeds (overrides seeds)")->delimiter(',');
  run->add_option("--threads", ov.threads, "worker threads (overrides threads)")->check(CLI::PositiveNumber);
  run->add_flag("--log-scale", log_scale, "log y axis on divergence plots");
  run->add_flag("--no-plots", no_plots, "skip SVG plots");

  std::string plot_out;
  std::string plot_oracle;
  std::string plot_title;
  std::vector<std::string> plot_traces;
  auto* plot = app.add_subcommand("plot", "plot trace CSVs as SVG (one file per statistic)");
  plot->add_option("traces", plot_traces, "trace CSV files (one per seed)")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "output directory")->required();
  plot->add_option("--oracle", plot_oracle, "oracle CSV to overlay")->check(CLI::ExistingFile);
  plot->add_option("--title", plot_title, "plot title");
  plot->add_flag("--log-scale", log_scale, "log y axis on divergence plots");

  auto* validate = app.add_subcommand("validate", "print the fully defaulted config or every error");
  validate->add_option("--config", ov.config, "experiment config (JSON)")->required();

  auto* oracle = app.add_subcommand("oracle", "write oracle curves only (gaussian_ar1)");
  oracle->add_option("--config", ov.config, "experiment config (JSON)")->required();
  oracle->add_option("--out", ov.out, "output directory (overrides output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitCode::bad_input);
  }

  try {
    if (*validate) {
      std::cout << wharm::to_json(load(ov)).dump(2) << '\n';
    } else if (*oracle) {
      for (const auto& f : wharm::write_oracle_curves(load(ov))) std::cout << f.string() << '\n';
    } else if (*run) {
      const auto cfg = load(ov);
      const auto outcome = wharm::run_experiment(cfg);
      for (const auto& g : outcome.groups) {
        const auto& last = g.runs.front().trace.back();
        std::printf("%-16s seeds=%zu final ess=%.4g (of %zu) cum_met=%.3f\n", g.label.c_str(), g.runs.size(),
                    last.ess, 2 * g.n_pairs, last.cum_met_fraction);
        if (no_plots) continue;
        wharm::PlotOptions po;
        po.log_scale = log_scale;
        po.oracle = g.oracle_file;
        po.title = cfg.experiment + " " + g.label;
        warn_dropped(wharm::plot_traces(g.trace_files, std::filesystem::path(cfg.output_dir) / "plots" / g.label, po));
      }
      std::printf("summary: %s (%.2f s)\n", outcome.summary_file.string().c_str(), outcome.wall_clock_seconds);
    } else if (*plot) {
      wharm::PlotOptions po;
      po.log_scale = log_scale;
      po.title = plot_title;
      if (!plot_oracle.empty()) po.oracle = plot_oracle;
      std::vector<std::filesystem::path> files(plot_traces.begin(), plot_traces.end());
      const auto report = wharm::plot_traces(files, plot_out, po);
      for (const auto& f : report.files) std::cout << f.path.string() << '\n';
      warn_dropped(report);
    }
  } catch (const wharm::ConfigError& e) {
    for (const auto& err : e.errors()) std::cerr << "error: " << err << '\n';
    return code(e.unknown_experiment() ? ExitCode::unknown_experiment : ExitCode::invalid_config);
  } catch (const wharm::OutputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(ExitCode::output_unwritable);
  } catch (const wharm::PlotError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(ExitCode::bad_input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(ExitCode::runtime_error);
  }
  return code(ExitCode::ok);
}
