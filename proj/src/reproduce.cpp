#include "noonsim/reproduce.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "noonsim/scan_io.hpp"
#include "noonsim/svg.hpp"

namespace noonsim::reproduce {

namespace {

Row make_row(std::string name, double reference, double simulated, double lo, double hi) {
  Row r;
  r.name = std::move(name);
  r.reference = reference;
  r.simulated = simulated;
  r.tol_lo = lo;
  r.tol_hi = hi;
  r.pass = simulated >= lo && simulated <= hi;
  return r;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  for (double x = lo; x <= hi + 0.5 * step; x += step) grid.push_back(x);
  return grid;
}

// Fits run unweighted: the stratified MC errors are orders of magnitude
// below the dip-shape model error (and vanish where the jitter cancels), so
// error-weighted least squares would let a handful of exact points starve
// the rest of the curve.
analysis::ScanCurve signal_curve(const source::ScanResult& scan) {
  return {scan.tv, scan.rate, {}};
}

analysis::ScanCurve accidental_curve(const source::ScanResult& scan) {
  return {scan.tv, scan.r2x2, {}};
}

// Fitted visibility of a pairwise two-fold curve, relative to the ideal 50%.
double beta_from_twofold(const source::ScanResult& scan) {
  analysis::ScanCurve curve{scan.tv, scan.two_ab, {}};
  const analysis::DipFit fit = analysis::fit_dips(curve, 1);
  return fit.visibility(0) / 0.5;
}

void write_scan_artifacts(const std::string& dir, const std::string& stem,
                          const source::ScanResult& scan) {
  scan_io::write_scan_csv(dir + "/" + stem + ".csv", scan);
  scan_io::write_twofold_csv(dir + "/" + stem + "_twofold.csv", scan);
  svg::Plot plot;
  plot.title = stem + " scan";
  plot.x_label = "cT_V (um)";
  plot.y_label = "rate";
  plot.series.push_back({"four-fold", scan.tv, scan.rate, "#1f77b4", svg::Marker::circle});
  plot.series.push_back({"2x2 estimate", scan.tv, scan.r2x2, "#d62728", svg::Marker::diamond});
  plot.write(dir + "/" + stem + ".svg");
}

}  // namespace

std::vector<double> overlapped_grid() { return linear_grid(-500.0, 500.0, kGridStep); }

std::vector<double> separated_grid() { return linear_grid(-400.0, 1000.0, kGridStep); }

double calibrate_packet_width(double target_fwhh, double ea_target, double mu,
                              std::uint64_t seed, std::int64_t samples) {
  double sigma = target_fwhh / 3.8;
  for (int iter = 0; iter < 3; ++iter) {
    source::SourceConfig cfg;
    cfg.sigma = sigma;
    cfg.jitter_s = source::calibrate_jitter(sigma, ea_target, seed, samples);
    cfg.mu_spatial = mu;
    cfg.t_h = 0.0;
    cfg.mc_samples = samples;
    cfg.seed = seed;
    // Self-similar grid so the fitted width scales linearly with sigma.
    std::vector<double> grid;
    for (int i = -20; i <= 20; ++i) grid.push_back(11.3 * sigma * i / 20.0);
    const source::ScanResult scan = source::scan_tv(cfg, grid);
    const analysis::DipFit fit = analysis::fit_dips(signal_curve(scan), 1);
    sigma *= target_fwhh / fit.dips.front().fwhh;
  }
  return sigma;
}

bool Report::pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

std::string Report::table() const {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-26s %10s %10s %-19s %s\n", "quantity", "reference",
                "simulated", "accepted band", "status");
  out << buf;
  out << std::string(78, '-') << '\n';
  for (const auto& r : rows) {
    char band[40];
    std::snprintf(band, sizeof(band), "[%.4g, %.4g]", r.tol_lo, r.tol_hi);
    std::snprintf(buf, sizeof(buf), "%-26s %10.4f %10.4f %-19s %s\n", r.name.c_str(), r.reference,
                  r.simulated, band, r.pass ? "pass" : "FAIL");
    out << buf;
  }
  return out.str();
}

Report run(const Options& opts) {
  Report rep;

  // Calibrations. The two scenarios were aligned differently, so each gets
  // its own spatial match and pair jitter; the packet width is shared.
  const double beta1 = 0.96, beta2 = 0.92;
  const double ea1 = 0.82, ea2 = 0.86;
  rep.mu_overlapped = temporal::spatial_match_for_beta(beta1);
  rep.mu_separated = temporal::spatial_match_for_beta(beta2);
  rep.sigma = calibrate_packet_width(185.0, ea1, rep.mu_overlapped, opts.seed, opts.samples);
  rep.jitter_overlapped = source::calibrate_jitter(rep.sigma, ea1, opts.seed, opts.samples);
  rep.jitter_separated = source::calibrate_jitter(rep.sigma, ea2, opts.seed, opts.samples);

  source::SourceConfig cfg1;
  cfg1.sigma = rep.sigma;
  cfg1.jitter_s = rep.jitter_overlapped;
  cfg1.mu_spatial = rep.mu_overlapped;
  cfg1.t_h = 0.0;
  cfg1.mc_samples = opts.samples;
  cfg1.seed = opts.seed;

  source::SourceConfig cfg2 = cfg1;
  cfg2.jitter_s = rep.jitter_separated;
  cfg2.mu_spatial = rep.mu_separated;
  cfg2.t_h = kSeparatedDelay;

  const auto t0 = std::chrono::steady_clock::now();
  rep.overlapped = source::scan_tv(cfg1, overlapped_grid(), opts.threads);
  rep.separated = source::scan_tv(cfg2, separated_grid(), opts.threads);
  rep.scan_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  rep.fit_overlapped = analysis::fit_dips(signal_curve(rep.overlapped), 1);
  rep.fit_separated = analysis::fit_dips(signal_curve(rep.separated), 2);

  const double v3 = rep.fit_overlapped.visibility(0);
  const double fwhh3 = rep.fit_overlapped.dips.front().fwhh;
  const double v_dip1 = rep.fit_separated.visibility(0);
  const double v_dip2 = rep.fit_separated.visibility(1);
  const double fwhh_sep = 0.5 * (rep.fit_separated.dips[0].fwhh + rep.fit_separated.dips[1].fwhh);

  const double ea_wings =
      analysis::infer_ea_wings(signal_curve(rep.overlapped), accidental_curve(rep.overlapped), 1);
  const double ea_v3 = analysis::infer_ea(v3, beta1, analysis::EaInversion::v3).value;
  const double ea_dip2 = analysis::infer_ea(v_dip2, beta2, analysis::EaInversion::dip2).value;

  const double beta1_sim = beta_from_twofold(rep.overlapped);
  const double beta2_sim = beta_from_twofold(rep.separated);

  // Lone dip of the independent-pairs estimate, against dip 1 of the signal.
  const analysis::DipFit lone = analysis::fit_dips(accidental_curve(rep.separated), 1);
  const double lone_offset =
      std::fabs(lone.dips.front().center - rep.fit_separated.dips.front().center);

  rep.rows.push_back(make_row("V3 overlapped", 0.91, v3, 0.89, 0.93));
  rep.rows.push_back(make_row("FWHH overlapped (um)", 185.0, fwhh3, 180.0, 190.0));
  rep.rows.push_back(make_row("V3 dip 1", 0.45, v_dip1, 0.43, 0.47));
  rep.rows.push_back(make_row("V3 dip 2", 0.39, v_dip2, 0.37, 0.41));
  rep.rows.push_back(make_row("FWHH separated (um)", 200.0, fwhh_sep, 185.0, 215.0));
  rep.rows.push_back(make_row("E/A from wings", 0.81, ea_wings, 0.77, 0.85));
  rep.rows.push_back(make_row("E/A from V3 inversion", 0.82, ea_v3, 0.78, 0.86));
  rep.rows.push_back(make_row("E/A from dip-2 inversion", 0.86, ea_dip2, 0.82, 0.90));
  rep.rows.push_back(make_row("beta overlapped", beta1, beta1_sim, beta1 - 0.02, beta1 + 0.02));
  rep.rows.push_back(make_row("beta separated", beta2, beta2_sim, beta2 - 0.02, beta2 + 0.02));
  rep.rows.push_back(
      make_row("2x2 lone-dip offset (um)", 0.0, lone_offset, 0.0, 0.5 * kGridStep));

  if (opts.write_files) {
    std::filesystem::create_directories(opts.out_dir);
    write_scan_artifacts(opts.out_dir, "overlapped", rep.overlapped);
    write_scan_artifacts(opts.out_dir, "separated", rep.separated);
    std::ofstream report(opts.out_dir + "/report.txt", std::ios::binary);
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "calibration: sigma=%.6g um, mu=(%.6g, %.6g), jitter=(%.6g, %.6g) um\n\n",
                  rep.sigma, rep.mu_overlapped, rep.mu_separated, rep.jitter_overlapped,
                  rep.jitter_separated);
    report << buf << rep.table();
  }
  return rep;
}

}  // namespace noonsim::reproduce
