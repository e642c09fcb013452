#include "wharm/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "wharm/experiment.hpp"
#include "wharm/trace_io.hpp"

namespace wharm {
namespace {

const std::vector<std::string> kBookkeeping{"t", "ess", "n_met", "cum_met_fraction", "min_w", "max_w",
                                            "logsumexp_w"};

const std::map<std::string, std::string> kOracleColumn{{"ess", "ess_star"}, {"chi2", "chi2"}, {"kl", "kl"}};

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

using Series = std::vector<std::pair<double, double>>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round tick positions (1, 2 or 5 times a power of ten) inside [lo, hi].
std::vector<double> nice_ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {2.0, 5.0, 10.0}) {
    if (raw / step <= 1.0) break;
    step = m * mag;
  }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
    ticks.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return ticks;
}

class Canvas {
 public:
  Canvas(double x0, double x1, double y0, double y1, bool log_y)
      : x0_(x0), x1_(x1 > x0 ? x1 : x0 + 1.0), log_y_(log_y) {
    y0_ = log_y ? std::log10(y0) : y0;
    y1_ = log_y ? std::log10(y1) : y1;
    if (!(y1_ > y0_)) {
      const double pad = std::max(1.0, std::abs(y0_)) * 0.5;
      y0_ -= pad;
      y1_ += pad;
    }
  }

  double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    const double v = log_y_ ? std::log10(y) : y;
    return kHeight - kBottom - (v - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom);
  }

  std::string points(const Series& s) const {
    std::string out;
    for (const auto& [x, y] : s) out += (out.empty() ? "" : " ") + num(px(x)) + "," + num(py(y));
    return out;
  }

  std::vector<double> y_ticks() const {
    std::vector<double> ticks;
    if (log_y_) {
      const int lo = static_cast<int>(std::ceil(y0_));
      const int hi = static_cast<int>(std::floor(y1_));
      const int stride = std::max(1, (hi - lo) / 6 + 1);
      for (int e = lo; e <= hi; e += stride) ticks.push_back(std::pow(10.0, e));
    } else {
      ticks = nice_ticks(y0_, y1_);
    }
    return ticks;
  }

  std::vector<double> x_ticks() const { return nice_ticks(x0_, x1_); }

 private:
  double x0_, x1_, y0_, y1_;
  bool log_y_;
};

bool keep(double v, bool log_y) { return std::isfinite(v) && (!log_y || v > 0.0); }

Series to_series(const std::vector<double>& t, const std::vector<double>& y, bool log_y, std::size_t& dropped) {
  Series s;
  for (std::size_t i = 0; i < t.size() && i < y.size(); ++i) {
    if (keep(y[i], log_y)) {
      s.emplace_back(t[i], y[i]);
    } else {
      ++dropped;
    }
  }
  return s;
}

void write_svg(const std::filesystem::path& path, const std::string& title, const std::string& column,
               const std::vector<Series>& seeds, const Series& mean, const Series& lower, const Series& upper,
               const std::optional<Series>& oracle, bool log_y) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto extend = [&](const Series& s) {
    for (const auto& [x, y] : s) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  };
  for (const auto& s : seeds) extend(s);
  extend(lower);
  extend(upper);
  if (oracle) extend(*oracle);
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = log_y ? 1.0 : 0.0;
    y1 = log_y ? 10.0 : 1.0;
  }
  const Canvas cv(x0, x1, y0, y1, log_y);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title.empty() ? column : title + ": " + column) << "</text>\n";

  const double bx = kLeft, by = kHeight - kBottom;
  out << "<g class=\"axes\" stroke=\"#444\" fill=\"none\">\n";
  out << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << by << "\"/>\n";
  out << "<line x1=\"" << bx << "\" y1=\"" << kTop << "\" x2=\"" << bx << "\" y2=\"" << by << "\"/>\n";
  out << "</g>\n<g class=\"ticks\" fill=\"#444\">\n";
  for (double x : cv.x_ticks()) {
    out << "<text x=\"" << num(cv.px(x)) << "\" y=\"" << by + 18 << "\" text-anchor=\"middle\">" << num(x)
        << "</text>\n";
  }
  for (double y : cv.y_ticks()) {
    out << "<text x=\"" << bx - 6 << "\" y=\"" << num(cv.py(y) + 4) << "\" text-anchor=\"end\">" << num(y)
        << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">t</text>\n";
  out << "<text x=\"16\" y=\"" << (kTop + by) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (kTop + by) / 2 << ")\">" << xml_escape(column) << (log_y ? " (log)" : "") << "</text>\n";
  out << "</g>\n";

  if (!lower.empty() && !upper.empty()) {
    Series poly = upper;
    poly.insert(poly.end(), lower.rbegin(), lower.rend());
    out << "<polygon class=\"band\" fill=\"#1f77b4\" fill-opacity=\"0.18\" stroke=\"none\" points=\""
        << cv.points(poly) << "\"/>\n";
  }
  for (const auto& s : seeds) {
    out << "<polyline class=\"seed\" fill=\"none\" stroke=\"#1f77b4\" stroke-opacity=\"0.3\" stroke-width=\"1\" "
           "points=\""
        << cv.points(s) << "\"/>\n";
  }
  out << "<polyline class=\"mean\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\""
      << cv.points(mean) << "\"/>\n";
  if (oracle) {
    out << "<polyline class=\"oracle\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" "
           "stroke-dasharray=\"6 4\" points=\""
        << cv.points(*oracle) << "\"/>\n";
  }
  out << "</svg>\n";
  if (!out) throw OutputError("write failed for " + path.string());
}

}  // namespace

std::size_t PlotReport::dropped_points() const {
  std::size_t n = 0;
  for (const auto& f : files) n += f.dropped_points;
  return n;
}

std::vector<std::string> plotted_columns(const std::vector<std::string>& header) {
  std::vector<std::string> cols{"ess"};
  for (const auto& c : header) {
    if (std::find(kBookkeeping.begin(), kBookkeeping.end(), c) == kBookkeeping.end()) cols.push_back(c);
  }
  return cols;
}

PlotReport plot_traces(const std::vector<std::filesystem::path>& traces, const std::filesystem::path& out_dir,
                       const PlotOptions& options) {
  if (traces.empty()) throw PlotError("no trace files given");
  std::vector<CsvTable> tables;
  for (const auto& p : traces) {
    try {
      tables.push_back(read_csv_table(p));
    } catch (const std::runtime_error& e) {
      throw PlotError(e.what());
    }
    std::vector<std::string> missing;
    for (const char* need : {"t", "ess"}) {
      if (tables.back().column(need) < 0) missing.emplace_back(need);
    }
    if (!missing.empty()) {
      std::string msg = p.string() + ": missing column(s)";
      for (const auto& m : missing) msg += " '" + m + "'";
      throw PlotError(msg);
    }
  }
  const std::vector<std::string> cols = plotted_columns(tables.front().columns);
  for (std::size_t i = 1; i < tables.size(); ++i) {
    for (const auto& c : cols) {
      if (tables[i].column(c) < 0) throw PlotError(traces[i].string() + ": missing column '" + c + "'");
    }
  }

  std::optional<CsvTable> oracle;
  if (options.oracle) {
    try {
      oracle = read_csv_table(*options.oracle);
    } catch (const std::runtime_error& e) {
      throw PlotError(e.what());
    }
    if (oracle->column("t") < 0) throw PlotError(options.oracle->string() + ": missing column 't'");
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw OutputError("cannot create output directory " + out_dir.string());
  }

  std::size_t len = tables.front().rows.size();
  for (const auto& t : tables) len = std::min(len, t.rows.size());

  PlotReport report;
  for (const auto& col : cols) {
    const bool log_y = options.log_scale && col != "ess";
    PlotFile pf;
    pf.column = col;
    pf.path = out_dir / (col + ".svg");

    std::vector<Series> seeds;
    std::vector<std::vector<double>> per_seed;
    for (const auto& tbl : tables) {
      auto y = tbl.values(col);
      y.resize(len);
      seeds.push_back(to_series(tbl.values("t"), y, log_y, pf.dropped_points));
      per_seed.push_back(std::move(y));
    }
    const auto t = [&] {
      auto v = tables.front().values("t");
      v.resize(len);
      return v;
    }();
    const Band band = band_across_seeds(per_seed);
    std::size_t band_dropped = 0;
    const Series mean = to_series(t, band.mean, log_y, band_dropped);
    Series lower, upper;
    for (std::size_t i = 0; i < len; ++i) {
      if (!keep(band.mean[i], log_y) || !std::isfinite(band.upper[i])) continue;
      // Under a log axis a band reaching zero is clipped at the smallest plotted mean.
      const double lo = log_y && !(band.lower[i] > 0.0) ? band.mean[i] : band.lower[i];
      if (!std::isfinite(lo)) continue;
      lower.emplace_back(t[i], lo);
      upper.emplace_back(t[i], band.upper[i]);
    }

    std::optional<Series> overlay;
    if (oracle) {
      const auto it = kOracleColumn.find(col);
      if (it != kOracleColumn.end() && oracle->column(it->second) >= 0) {
        overlay = to_series(oracle->values("t"), oracle->values(it->second), log_y, pf.dropped_points);
        pf.has_oracle = true;
      }
    }
    pf.seed_lines = seeds.size();
    write_svg(pf.path, options.title, col, seeds, mean, lower, upper, overlay, log_y);
    report.files.push_back(std::move(pf));
  }
  return report;
}

}  // namespace wharm
