#pragma once

// Static SVG line plots of trace CSVs: one file per statistic (ess plus every
// divergence column), with faint per-seed lines, the across-seed mean, a
// +-2 SD band and an optional oracle overlay.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wharm {

class PlotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlotOptions {
  bool log_scale = false;  // applies to divergence plots only
  std::optional<std::filesystem::path> oracle;
  std::string title;
};

struct PlotFile {
  std::filesystem::path path;
  std::string column;
  std::size_t seed_lines = 0;
  bool has_oracle = false;
  std::size_t dropped_points = 0;  // non-finite, or non-positive under log scale
};

struct PlotReport {
  std::vector<PlotFile> files;

  std::size_t dropped_points() const;
};

// Columns plotted for a trace header: "ess" followed by the divergence columns.
std::vector<std::string> plotted_columns(const std::vector<std::string>& header);

PlotReport plot_traces(const std::vector<std::filesystem::path>& traces, const std::filesystem::path& out_dir,
                       const PlotOptions& options = {});

}  // namespace wharm
