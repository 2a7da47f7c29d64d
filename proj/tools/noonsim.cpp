// noonsim command-line front end.
//
// Subcommands: fringe | scan | fit | predict | infer-ea | reproduce.
// Options may come from flags or a key=value config file (flags win).
// Exit codes: 0 ok, 1 reproduction-row failure, 2 config error, 3 fit failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noonsim/fock.hpp"
#include "noonsim/reproduce.hpp"
#include "noonsim/rng.hpp"
#include "noonsim/scan_io.hpp"
#include "noonsim/source.hpp"
#include "noonsim/svg.hpp"

namespace {

using namespace noonsim;

constexpr int kExitOk = 0;
constexpr int kExitRowFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFit = 3;

// Flat key=value config support. The file is expanded into long options and
// spliced in after the subcommand; keys the user already passed as flags are
// dropped, so precedence is flag > file > default.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config file " + config_path);

  std::vector<std::string> user_flags;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) user_flags.push_back(a.substr(0, a.find('=')));

  std::vector<std::string> out(args);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(config_path + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error(config_path + ": empty key");
    const std::string flag = "--" + key;
    if (std::find(user_flags.begin(), user_flags.end(), flag) != user_flags.end()) continue;
    out.push_back(flag);
    out.push_back(value);
  }
  return out;
}

struct FringeOptions {
  int n = 3;
  std::string state = "noon";  // noon | plus | custom
  double c0_re = 1.0, c0_im = 0.0, cn_re = 1.0, cn_im = 0.0;
  double delta_max = 2.0 * std::numbers::pi;
  int points = 256;
  std::string csv = "fringe.csv";
  std::string svg_path;
};

int run_fringe(const FringeOptions& opt) {
  fock::Complex c0, cn;
  const double r = 1.0 / std::sqrt(2.0);
  if (opt.state == "noon") {
    c0 = -r;
    cn = r;
  } else if (opt.state == "plus") {
    c0 = r;
    cn = r;
  } else if (opt.state == "custom") {
    c0 = {opt.c0_re, opt.c0_im};
    cn = {opt.cn_re, opt.cn_im};
  } else {
    std::cerr << "fringe: unknown state '" << opt.state << "'\n";
    return kExitConfig;
  }
  const auto model = fock::FringeModel::from_amplitudes(c0, cn, opt.n);
  std::vector<double> deltas;
  for (int i = 0; i < opt.points; ++i)
    deltas.push_back(opt.delta_max * i / static_cast<double>(opt.points));
  const std::vector<double> rates = fock::fringe_scan(model, deltas);
  scan_io::write_csv(opt.csv, {"delta_rad", "rate"}, {deltas, rates});
  if (!opt.svg_path.empty()) {
    svg::Plot plot;
    plot.title = "projection fringe, N=" + std::to_string(opt.n);
    plot.x_label = "delta (rad)";
    plot.y_label = "rate";
    plot.series.push_back({"fringe", deltas, rates, "#1f77b4", svg::Marker::none});
    plot.write(opt.svg_path);
  }
  std::cout << "wrote " << opt.csv << "\n";
  return kExitOk;
}

struct ScanOptions {
  source::SourceConfig cfg;
  double tv_min = -500.0, tv_max = 500.0, tv_step = 25.0;
  int threads = 1;
  std::string csv = "scan.csv";
  std::string svg_path;
  std::string twofold_csv;
  double poisson_counts = 0.0;  // 0 disables noise injection
  double floor = 0.0;
};

int run_scan(const ScanOptions& opt) {
  if (opt.tv_step <= 0.0 || opt.tv_max < opt.tv_min) {
    std::cerr << "scan: bad grid\n";
    return kExitConfig;
  }
  std::vector<double> grid;
  for (double t = opt.tv_min; t <= opt.tv_max + 0.5 * opt.tv_step; t += opt.tv_step)
    grid.push_back(t);
  source::ScanResult scan = source::scan_tv(opt.cfg, grid, opt.threads);

  if (opt.poisson_counts > 0.0) {
    // Replace rates with Poisson counts scaled so the peak expectation hits
    // poisson_counts, plus a flat accidental floor.
    double peak = 0.0;
    for (double r : scan.rate) peak = std::max(peak, r);
    const double scale = peak > 0.0 ? opt.poisson_counts / peak : 0.0;
    for (std::size_t i = 0; i < scan.rate.size(); ++i) {
      rng::Stream stream(rng::derive_key(opt.cfg.seed, 0x706f6973 + i, 0x9));
      const double mean = scan.rate[i] * scale + opt.floor;
      const double counts = static_cast<double>(rng::poisson(stream, mean));
      scan.rate[i] = counts;
      scan.stderror[i] = std::sqrt(std::max(counts, 1.0));
      scan.r2x2[i] *= scale;
    }
  }

  scan_io::write_scan_csv(opt.csv, scan);
  if (!opt.twofold_csv.empty()) scan_io::write_twofold_csv(opt.twofold_csv, scan);
  if (!opt.svg_path.empty()) {
    svg::Plot plot;
    plot.title = "four-fold coincidence vs V-photon delay";
    plot.x_label = "cT_V (um)";
    plot.y_label = "rate";
    plot.series.push_back({"four-fold", scan.tv, scan.rate, "#1f77b4", svg::Marker::circle});
    plot.series.push_back({"2x2 estimate", scan.tv, scan.r2x2, "#d62728", svg::Marker::diamond});
    plot.write(opt.svg_path);
  }
  std::cout << "wrote " << opt.csv << "\n";
  return kExitOk;
}

struct FitOptions {
  std::string input;
  int n_dips = 1;
  std::vector<double> init_centers;
};

int run_fit(const FitOptions& opt) {
  const analysis::ScanCurve curve = scan_io::read_curve(opt.input);
  std::optional<std::vector<double>> init;
  if (!opt.init_centers.empty()) init = opt.init_centers;
  analysis::DipFit fit;
  try {
    fit = analysis::fit_dips(curve, opt.n_dips, init);
  } catch (const analysis::FitFailure& e) {
    std::cerr << "fit failed: " << e.what() << "\n";
    return kExitFit;
  } catch (const analysis::IllPosedFit& e) {
    std::cerr << "fit ill-posed: " << e.what() << "\n";
    return kExitFit;
  }
  std::printf("{\n  \"baseline\": %s,\n", scan_io::format_value(fit.baseline).c_str());
  std::printf("  \"residual_rms\": %s,\n  \"dips\": [\n",
              scan_io::format_value(fit.residual_rms).c_str());
  for (std::size_t d = 0; d < fit.dips.size(); ++d) {
    const auto& dip = fit.dips[d];
    std::printf("    {\"visibility\": %s, \"center\": %s, \"fwhh\": %s, \"center_determined\": %s}%s\n",
                scan_io::format_value(fit.visibility(d)).c_str(),
                scan_io::format_value(dip.center).c_str(),
                scan_io::format_value(dip.fwhh).c_str(),
                dip.center_determined ? "true" : "false",
                d + 1 < fit.dips.size() ? "," : "");
  }
  std::printf("  ]\n}\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noonsim: NOON-state projection simulator and analysis toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = source::SourceConfig{}.seed;
  std::string config_path;
  auto add_common = [&seed, &config_path](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file (flags take precedence)");
    cmd->add_option("--seed", seed, "master random seed")
        ->envname("NOONSIM_SEED")
        ->capture_default_str();
  };

  FringeOptions fringe;
  auto* cmd_fringe = app.add_subcommand("fringe", "projection-rate fringe vs H/V phase");
  add_common(cmd_fringe);
  cmd_fringe->add_option("--n", fringe.n, "photon number")->capture_default_str();
  cmd_fringe->add_option("--state", fringe.state, "noon | plus | custom")->capture_default_str();
  cmd_fringe->add_option("--c0-re", fringe.c0_re, "custom state: Re c0");
  cmd_fringe->add_option("--c0-im", fringe.c0_im, "custom state: Im c0");
  cmd_fringe->add_option("--cn-re", fringe.cn_re, "custom state: Re cN");
  cmd_fringe->add_option("--cn-im", fringe.cn_im, "custom state: Im cN");
  cmd_fringe->add_option("--points", fringe.points, "grid points over [0, delta-max)")
      ->capture_default_str();
  cmd_fringe->add_option("--delta-max", fringe.delta_max, "phase range (rad)")
      ->capture_default_str();
  cmd_fringe->add_option("--csv", fringe.csv, "output CSV path")->capture_default_str();
  cmd_fringe->add_option("--svg", fringe.svg_path, "optional SVG plot path");

  ScanOptions scan;
  auto* cmd_scan = app.add_subcommand("scan", "four-fold coincidence vs V-photon delay");
  add_common(cmd_scan);
  cmd_scan->add_option("--sigma", scan.cfg.sigma, "packet width (um)")->capture_default_str();
  cmd_scan->add_option("--jitter", scan.cfg.jitter_s, "per-crystal timing jitter (um)")
      ->capture_default_str();
  cmd_scan->add_option("--mu", scan.cfg.mu_spatial, "spatial match in [0,1]")
      ->capture_default_str();
  cmd_scan->add_option("--th", scan.cfg.t_h, "delay between the H photons (um)")
      ->capture_default_str();
  cmd_scan->add_option("--samples", scan.cfg.mc_samples, "MC samples per grid point")
      ->capture_default_str();
  cmd_scan->add_option("--tv-min", scan.tv_min, "grid start (um)")->capture_default_str();
  cmd_scan->add_option("--tv-max", scan.tv_max, "grid end (um)")->capture_default_str();
  cmd_scan->add_option("--tv-step", scan.tv_step, "grid step (um)")->capture_default_str();
  cmd_scan->add_option("--threads", scan.threads, "scan worker threads")->capture_default_str();
  cmd_scan->add_option("--csv", scan.csv, "output CSV path")->capture_default_str();
  cmd_scan->add_option("--svg", scan.svg_path, "optional SVG plot path");
  cmd_scan->add_option("--twofold-csv", scan.twofold_csv, "optional pairwise two-fold CSV");
  cmd_scan->add_option("--poisson-counts", scan.poisson_counts,
                       "inject Poisson noise with this expected peak count");
  cmd_scan->add_option("--floor", scan.floor, "flat accidental floor for noise injection")
      ->capture_default_str();

  FitOptions fit;
  auto* cmd_fit = app.add_subcommand("fit", "fit dips in a scan CSV");
  add_common(cmd_fit);
  cmd_fit->add_option("input", fit.input, "input CSV (x, y[, stderr])")->required();
  cmd_fit->add_option("--dips", fit.n_dips, "number of dips (1 or 2)")->capture_default_str();
  cmd_fit->add_option("--init-centers", fit.init_centers, "initial dip centers (um)");

  double beta = 1.0, ea = 1.0;
  int mk_n = 3, mk_m = -1;
  auto* cmd_predict = app.add_subcommand("predict", "closed-form visibility predictions");
  add_common(cmd_predict);
  cmd_predict->add_option("--beta", beta, "spatial reduction factor")->capture_default_str();
  cmd_predict->add_option("--ea", ea, "pair indistinguishability E/A")->capture_default_str();
  cmd_predict->add_option("--n", mk_n, "photon number for the m/(n-1) rule")
      ->capture_default_str();
  cmd_predict->add_option("--m", mk_m, "co-modal H photons; enables the m/(n-1) output");

  std::string infer_method = "v3";
  double infer_v3 = 0.0;
  int infer_dips = 1;
  std::string infer_signal, infer_accidental;
  auto* cmd_infer = app.add_subcommand("infer-ea", "deduce E/A from visibilities or wings");
  add_common(cmd_infer);
  cmd_infer->add_option("--method", infer_method, "v3 | dip2 | wings")->capture_default_str();
  cmd_infer->add_option("--v3", infer_v3, "measured visibility (v3/dip2 methods)");
  cmd_infer->add_option("--beta", beta, "spatial reduction factor");
  cmd_infer->add_option("--signal", infer_signal, "signal CSV (wings method)");
  cmd_infer->add_option("--accidental", infer_accidental,
                        "accidental CSV or scan CSV with r2x2 (wings method)");
  cmd_infer->add_option("--dips", infer_dips, "signal dips to exclude (wings method)")
      ->capture_default_str();

  reproduce::Options rep;
  auto* cmd_rep = app.add_subcommand("reproduce", "calibrated benchmark scans and report");
  add_common(cmd_rep);
  cmd_rep->add_option("--out-dir", rep.out_dir, "artifact directory")->capture_default_str();
  cmd_rep->add_option("--samples", rep.samples, "MC samples per grid point")
      ->capture_default_str();
  cmd_rep->add_option("--threads", rep.threads, "scan worker threads")->capture_default_str();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(args);
    // CLI11 consumes reversed argument lists.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  scan.cfg.seed = seed;
  rep.seed = seed;

  try {
    if (cmd_fringe->parsed()) return run_fringe(fringe);
    if (cmd_scan->parsed()) return run_scan(scan);
    if (cmd_fit->parsed()) return run_fit(fit);
    if (cmd_predict->parsed()) {
      if (mk_m >= 0) {
        std::printf("v_%d(m=%d) = %s\n", mk_n, mk_m,
                    scan_io::format_value(analysis::predict_visibility_mk(mk_n, mk_m)).c_str());
        return kExitOk;
      }
      const auto p = analysis::predict_visibilities(beta, ea);
      std::printf("v3_overlapped = %s\n", scan_io::format_value(p.v3_overlapped).c_str());
      std::printf("v3_dip1       = %s\n", scan_io::format_value(p.v3_dip1).c_str());
      std::printf("v3_dip2       = %s\n", scan_io::format_value(p.v3_dip2).c_str());
      return kExitOk;
    }
    if (cmd_infer->parsed()) {
      if (infer_method == "wings") {
        if (infer_signal.empty() || infer_accidental.empty()) {
          std::cerr << "infer-ea: wings method needs --signal and --accidental\n";
          return kExitConfig;
        }
        const auto sig = scan_io::read_curve(infer_signal);
        analysis::ScanCurve acc;
        try {
          acc = scan_io::read_accidental(infer_accidental);
        } catch (const std::exception&) {
          acc = scan_io::read_curve(infer_accidental);
        }
        std::printf("ea_wings = %s\n",
                    scan_io::format_value(analysis::infer_ea_wings(sig, acc, infer_dips)).c_str());
        return kExitOk;
      }
      const auto method =
          infer_method == "dip2" ? analysis::EaInversion::dip2 : analysis::EaInversion::v3;
      if (infer_method != "dip2" && infer_method != "v3") {
        std::cerr << "infer-ea: unknown method '" << infer_method << "'\n";
        return kExitConfig;
      }
      const auto inferred = analysis::infer_ea(infer_v3, beta, method);
      if (inferred.clamped) std::cerr << "warning: result clamped to [0,1]\n";
      std::printf("ea = %s\n", scan_io::format_value(inferred.value).c_str());
      return kExitOk;
    }
    if (cmd_rep->parsed()) {
      const reproduce::Report report = reproduce::run(rep);
      char buf[200];
      std::snprintf(buf, sizeof(buf),
                    "calibration: sigma=%.6g um, mu=(%.6g, %.6g), jitter=(%.6g, %.6g) um\n\n",
                    report.sigma, report.mu_overlapped, report.mu_separated,
                    report.jitter_overlapped, report.jitter_separated);
      std::cout << buf << report.table();
      if (!report.pass()) {
        std::cout << "\nFAILED rows present (see table)\n";
        return kExitRowFailure;
      }
      std::cout << "\nall rows pass\n";
      return kExitOk;
    }
  } catch (const analysis::FitFailure& e) {
    std::cerr << "fit failed: " << e.what() << "\n";
    return kExitFit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
