#pragma once

// Trace CSV schema:
//   t,ess,n_met,cum_met_fraction,min_w,max_w,logsumexp_w,<spec name>...
// Reals are written with 17 significant digits so they round-trip exactly;
// infinite bounds are written as "inf".

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wharm/harmonizer.hpp"

namespace wharm {

std::vector<std::string> trace_columns(const std::vector<std::string>& spec_names);
std::string format_real(double v);

void write_trace_csv(std::ostream& out, const std::vector<std::string>& spec_names,
                     const std::vector<DiagnosticRecord>& trace);
void write_trace_csv(const std::filesystem::path& path, const std::vector<std::string>& spec_names,
                     const std::vector<DiagnosticRecord>& trace);

// Generic numeric CSV table (traces and oracle curves).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  // Index of a column or -1.
  int column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

CsvTable read_csv_table(const std::filesystem::path& path);

}  // namespace wharm
