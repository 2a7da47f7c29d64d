#include "noonsim/scan_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace noonsim::scan_io {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size())
    throw std::invalid_argument("write_csv: header/column count mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw std::invalid_argument("write_csv: ragged columns");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << ',';
    out << header[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << ',';
      out << format_value(columns[c][r]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

void write_scan_csv(const std::string& path, const source::ScanResult& scan) {
  write_csv(path, {"tv_um", "rate", "stderr", "r2x2"},
            {scan.tv, scan.rate, scan.stderror, scan.r2x2});
}

void write_twofold_csv(const std::string& path, const source::ScanResult& scan) {
  write_csv(path, {"tv_um", "r_ab", "r_ac", "r_bc"},
            {scan.tv, scan.two_ab, scan.two_ac, scan.two_bc});
}

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  table.columns.assign(table.header.size(), {});
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= table.columns.size())
        throw std::runtime_error("read_csv: too many fields in " + path);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw std::runtime_error("read_csv: bad number '" + cell + "'");
      table.columns[col].push_back(v);
      ++col;
    }
    if (col != table.columns.size())
      throw std::runtime_error("read_csv: short row in " + path);
  }
  return table;
}

analysis::ScanCurve read_curve(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.columns.size() < 2)
    throw std::runtime_error("read_curve: need at least two columns in " + path);
  analysis::ScanCurve curve;
  curve.x = table.columns[0];
  curve.y = table.columns[1];
  const int err = table.column_index("stderr");
  if (err >= 0) {
    curve.yerr = table.columns[static_cast<std::size_t>(err)];
    bool all_zero = true;
    for (double e : curve.yerr) all_zero &= e == 0.0;
    if (all_zero) curve.yerr.clear();
  }
  curve.validate();
  return curve;
}

analysis::ScanCurve read_accidental(const std::string& path) {
  const CsvTable table = read_csv(path);
  const int col = table.column_index("r2x2");
  if (col < 0) throw std::runtime_error("read_accidental: no r2x2 column in " + path);
  analysis::ScanCurve curve;
  curve.x = table.columns[0];
  curve.y = table.columns[static_cast<std::size_t>(col)];
  curve.validate();
  return curve;
}

}  // namespace noonsim::scan_io
