#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noonsim/analysis.hpp"
#include "noonsim/source.hpp"

// One-shot benchmark run: calibrates the spatial match to the target betas,
// the pair jitter to the target E/A values and the packet width to the
// reference dip width, simulates the overlapped (t_h = 0) and separated
// (t_h >> sigma) delay scans, fits them, infers E/A three independent ways
// and compares everything against the reference values.
namespace noonsim::reproduce {

struct Options {
  std::uint64_t seed = 0x6e6f6f6e73696dULL;
  std::int64_t samples = 20000;
  std::string out_dir = "reproduce_out";
  int threads = 1;
  bool write_files = true;
};

struct Row {
  std::string name;
  double reference = 0.0;
  double simulated = 0.0;
  double tol_lo = 0.0;  // acceptance band, absolute
  double tol_hi = 0.0;
  bool pass = false;
};

struct Report {
  std::vector<Row> rows;
  double sigma = 0.0;       // calibrated packet width
  double mu_overlapped = 0.0;
  double mu_separated = 0.0;
  double jitter_overlapped = 0.0;
  double jitter_separated = 0.0;
  source::ScanResult overlapped;
  source::ScanResult separated;
  analysis::DipFit fit_overlapped;
  analysis::DipFit fit_separated;
  double scan_seconds = 0.0;

  bool pass() const;
  std::string table() const;
};

/// Packet width such that the overlapped-scan fitted FWHH hits target_fwhh.
double calibrate_packet_width(double target_fwhh, double ea_target, double mu,
                              std::uint64_t seed, std::int64_t samples);

Report run(const Options& opts);

/// Grids used for the two scenario scans.
std::vector<double> overlapped_grid();
std::vector<double> separated_grid();
constexpr double kSeparatedDelay = 600.0;  // micrometers
constexpr double kGridStep = 25.0;

}  // namespace noonsim::reproduce
