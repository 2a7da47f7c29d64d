#pragma once

#include <string>
#include <vector>

#include "noonsim/analysis.hpp"
#include "noonsim/source.hpp"

// CSV formats: comma separated, one header row, '.' decimal point, LF line
// endings, values at 12 significant digits (lossless round-trip at that
// precision).
namespace noonsim::scan_io {

std::string format_value(double v);

/// Generic table writer; columns must share one length.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// Scan output with columns {tv_um, rate, stderr, r2x2}.
void write_scan_csv(const std::string& path, const source::ScanResult& scan);

/// Pairwise two-fold curves {tv_um, r_ab, r_ac, r_bc}.
void write_twofold_csv(const std::string& path, const source::ScanResult& scan);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // column-major

  int column_index(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

/// Reads a curve: x from column 0, y from column 1, errors from a column
/// named "stderr" when present.
analysis::ScanCurve read_curve(const std::string& path);

/// Reads the r2x2 column alongside the curve grid.
analysis::ScanCurve read_accidental(const std::string& path);

}  // namespace noonsim::scan_io
