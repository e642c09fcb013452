#include "wharm/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wharm {

std::vector<std::string> trace_columns(const std::vector<std::string>& spec_names) {
  std::vector<std::string> cols{"t", "ess", "n_met", "cum_met_fraction", "min_w", "max_w", "logsumexp_w"};
  cols.insert(cols.end(), spec_names.begin(), spec_names.end());
  return cols;
}

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const std::vector<std::string>& spec_names,
                     const std::vector<DiagnosticRecord>& trace) {
  const auto cols = trace_columns(spec_names);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : trace) {
    if (r.bounds.size() != spec_names.size()) throw std::invalid_argument("write_trace_csv: bound count mismatch");
    out << r.t << ',' << format_real(r.ess) << ',' << r.n_met << ',' << format_real(r.cum_met_fraction) << ','
        << format_real(r.min_w) << ',' << format_real(r.max_w) << ',' << format_real(r.logsumexp_w);
    for (double b : r.bounds) out << ',' << format_real(b);
    out << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<std::string>& spec_names,
                     const std::vector<DiagnosticRecord>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trace_csv(out, spec_names, trace);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw std::out_of_range("missing column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
  return out;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
  };
  if (!std::getline(in, line)) throw std::runtime_error("empty csv " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.columns = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto parts = split(line);
    if (parts.size() != table.columns.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": wrong field count");
    }
    std::vector<double> row;
    row.reserve(parts.size());
    for (const auto& p : parts) {
      try {
        row.push_back(std::stod(p));
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad number '" + p + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace wharm
