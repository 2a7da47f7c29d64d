#include "noonsim/source.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "noonsim/analysis.hpp"
#include "noonsim/rng.hpp"

namespace noonsim::source {

namespace {

using temporal::Photon;
using temporal::Polarization;
using temporal::WavePacket;

constexpr double kWingsSeThreshold = 0.02;

double gram_entry(double mu, double center_a, double center_b, double sigma) {
  return mu * temporal::overlap({center_a, sigma}, {center_b, sigma});
}

// One (tau1, tau2) draw per sample index. The pair-delay difference is the
// only combination the rates depend on, so it is sampled stratified; the
// common component stays plain normal. Streams are keyed by sample index
// alone, which makes the draws common across grid points.
struct JitterDraw {
  double tau1 = 0.0;
  double tau2 = 0.0;
};

JitterDraw draw_jitter(const SourceConfig& cfg, std::int64_t sample) {
  rng::Stream stream(rng::derive_key(cfg.seed, static_cast<std::uint64_t>(sample) + 1));
  const double stratum =
      (static_cast<double>(sample) + stream.u01()) / static_cast<double>(cfg.mc_samples);
  const double w = rng::normal_icdf(stratum);
  const double v = stream.normal();
  const double r = cfg.jitter_s / std::sqrt(2.0);
  return {r * (v + w), r * (v - w)};
}

// Rates for the gated triple with the network weights cached once.
class TripleEvaluator {
 public:
  TripleEvaluator()
      : net_(3),
        pairing_(net_, {Polarization::H, Polarization::H, Polarization::V}, {0, 1, 2}) {}

  double rate(const SourceConfig& cfg, double tau1, double tau2) const {
    const double c0 = cfg.t_h + tau1;
    const double c1 = tau2;
    const double c2 = cfg.t_v + tau2;
    const double mu = cfg.mu_spatial;
    double gram[9] = {1.0,
                      gram_entry(mu, c0, c1, cfg.sigma),
                      gram_entry(mu, c0, c2, cfg.sigma),
                      0.0,
                      1.0,
                      gram_entry(mu, c1, c2, cfg.sigma),
                      0.0,
                      0.0,
                      1.0};
    gram[3] = gram[1];
    gram[6] = gram[2];
    gram[7] = gram[5];
    return pairing_.eval_real(gram, 3);
  }

  const temporal::ProjectorNetwork& net() const { return net_; }

 private:
  temporal::ProjectorNetwork net_;
  temporal::detail::PairingRate pairing_;
};

const TripleEvaluator& triple_evaluator() {
  static const TripleEvaluator eval;
  return eval;
}

RateEstimate fourfold_at(const SourceConfig& cfg) {
  const TripleEvaluator& eval = triple_evaluator();
  if (cfg.jitter_s == 0.0) return {eval.rate(cfg, 0.0, 0.0), 0.0};
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t s = 0; s < cfg.mc_samples; ++s) {
    const JitterDraw d = draw_jitter(cfg, s);
    const double r = eval.rate(cfg, d.tau1, d.tau2);
    sum += r;
    sumsq += r * r;
  }
  const double n = static_cast<double>(cfg.mc_samples);
  const double mean = sum / n;
  double se = 0.0;
  if (cfg.mc_samples > 1) {
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    se = std::sqrt(var / n);
  }
  return {mean, se};
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  const int t = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < count; i += t) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

void SourceConfig::validate() const {
  if (sigma <= 0.0) throw std::invalid_argument("SourceConfig: sigma must be positive");
  if (jitter_s < 0.0) throw std::invalid_argument("SourceConfig: jitter must be nonnegative");
  if (mu_spatial < 0.0 || mu_spatial > 1.0)
    throw std::invalid_argument("SourceConfig: spatial match must be in [0,1]");
  if (mc_samples < 1) throw std::invalid_argument("SourceConfig: need at least one MC sample");
}

GatedEvent build_event(const SourceConfig& cfg, double tau1, double tau2) {
  cfg.validate();
  std::vector<Photon> photons{
      {Polarization::H, {cfg.t_h + tau1, cfg.sigma}, 1},
      {Polarization::H, {tau2, cfg.sigma}, 2},
      {Polarization::V, {cfg.t_v + tau2, cfg.sigma}, 2},
  };
  return {tau1, tau2, PhotonEnsemble::make(std::move(photons), cfg.mu_spatial)};
}

RateEstimate fourfold_rate(const SourceConfig& cfg) {
  cfg.validate();
  return fourfold_at(cfg);
}

double accidental_fourfold(double r_ab, double r_ac, double r_bc, double r_ad,
                           double r_bd, double r_cd, double r0) {
  for (double r : {r_ab, r_ac, r_bc, r_ad, r_bd, r_cd})
    if (r < 0.0) throw std::invalid_argument("accidental_fourfold: rates must be nonnegative");
  if (r0 <= 0.0) throw std::invalid_argument("accidental_fourfold: r0 must be positive");
  return (r_ab * r_cd + r_ac * r_bd + r_ad * r_bc) / r0;
}

double gate_pair_rate(int n_arms) { return 1.0 / (2.0 * n_arms); }

ScanResult scan_tv(const SourceConfig& cfg, const std::vector<double>& tv_grid, int threads) {
  cfg.validate();
  if (tv_grid.empty()) throw std::invalid_argument("scan_tv: empty grid");

  const int count = static_cast<int>(tv_grid.size());
  ScanResult out;
  out.tv = tv_grid;
  out.rate.resize(tv_grid.size());
  out.stderror.resize(tv_grid.size());
  out.r2x2.resize(tv_grid.size());
  out.two_ab.resize(tv_grid.size());
  out.two_ac.resize(tv_grid.size());
  out.two_bc.resize(tv_grid.size());

  const temporal::ProjectorNetwork& net = triple_evaluator().net();
  const double gate = gate_pair_rate(net.n_arms());

  parallel_for(count, threads, [&](int i) {
    SourceConfig point = cfg;
    point.t_v = tv_grid[static_cast<std::size_t>(i)];
    const RateEstimate est = fourfold_at(point);
    out.rate[static_cast<std::size_t>(i)] = est.value;
    out.stderror[static_cast<std::size_t>(i)] = est.stderror;

    // Two-fold coincidences are dominated by lone-pair events; the crystal-2
    // pair is the only one that can fire two projector arms. Its internal
    // delay is t_v exactly (the shared pair offset cancels).
    std::vector<Photon> pair{{Polarization::H, {0.0, cfg.sigma}, 2},
                             {Polarization::V, {point.t_v, cfg.sigma}, 2}};
    const PhotonEnsemble ens = PhotonEnsemble::make(pair, cfg.mu_spatial);
    const double ab = temporal::two_fold_inclusive_rate(ens, net, 0, 1);
    const double ac = temporal::two_fold_inclusive_rate(ens, net, 0, 2);
    const double bc = temporal::two_fold_inclusive_rate(ens, net, 1, 2);
    out.two_ab[static_cast<std::size_t>(i)] = ab;
    out.two_ac[static_cast<std::size_t>(i)] = ac;
    out.two_bc[static_cast<std::size_t>(i)] = bc;
    out.r2x2[static_cast<std::size_t>(i)] =
        accidental_fourfold(ab, ac, bc, gate, gate, gate, 1.0);
  });
  return out;
}

EAEstimate effective_ea(const SourceConfig& cfg) {
  cfg.validate();
  SourceConfig probe = cfg;
  probe.t_h = 0.0;
  probe.mu_spatial = 1.0;

  std::vector<double> grid;
  for (int i = -24; i <= 24; ++i) grid.push_back(0.5 * probe.sigma * i);
  const ScanResult scan = scan_tv(probe, grid);

  analysis::ScanCurve signal{scan.tv, scan.rate, {}};
  const analysis::DipFit fit = analysis::fit_dips(signal, 1);
  const double center = fit.dips.front().center;
  const double fwhh = fit.dips.front().fwhh;

  double ratio_sum = 0.0, se_sum = 0.0;
  int wings = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::fabs(grid[i] - center) <= 2.0 * fwhh) continue;
    ratio_sum += scan.rate[i] / scan.r2x2[i];
    se_sum += scan.stderror[i] / scan.r2x2[i];
    ++wings;
  }
  if (wings < 5) throw UnstableEstimate("effective_ea: too few wing points", 0.0);
  const double se = se_sum / wings;
  if (se > kWingsSeThreshold)
    throw UnstableEstimate("effective_ea: wings estimate too noisy; raise mc_samples", se);
  const double value = ratio_sum / wings - 1.0;
  return {std::clamp(value, 0.0, 1.0), EAEstimate::Method::wings, se};
}

double pair_indistinguishability(double sigma, double jitter_s, std::uint64_t seed,
                                 std::int64_t samples) {
  if (sigma <= 0.0) throw std::invalid_argument("pair_indistinguishability: sigma must be positive");
  if (jitter_s < 0.0) throw std::invalid_argument("pair_indistinguishability: jitter must be nonnegative");
  if (samples < 1) throw std::invalid_argument("pair_indistinguishability: need samples");
  if (jitter_s == 0.0) return 1.0;
  SourceConfig cfg;
  cfg.sigma = sigma;
  cfg.jitter_s = jitter_s;
  cfg.seed = seed;
  cfg.mc_samples = samples;
  double sum = 0.0;
  for (std::int64_t s = 0; s < samples; ++s) {
    const JitterDraw d = draw_jitter(cfg, s);
    const double delta = d.tau1 - d.tau2;
    sum += std::exp(-delta * delta / (4.0 * sigma * sigma));
  }
  return sum / static_cast<double>(samples);
}

double calibrate_jitter(double sigma, double target_ea, std::uint64_t seed,
                        std::int64_t samples) {
  if (target_ea <= 0.0 || target_ea > 1.0)
    throw std::invalid_argument("calibrate_jitter: target must be in (0,1]");
  if (target_ea >= 1.0) return 0.0;
  double lo = 0.0;
  double hi = 50.0 * sigma;
  while (pair_indistinguishability(sigma, hi, seed, samples) > target_ea) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * sigma; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pair_indistinguishability(sigma, mid, seed, samples) > target_ea ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace noonsim::source
