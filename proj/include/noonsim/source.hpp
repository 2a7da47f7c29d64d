#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "noonsim/temporal.hpp"

// Two-crystal pulsed-PDC model. A gated event carries three photons into the
// 3-arm projector: the crystal-1 H photon (delayed by t_h), the crystal-2 H
// photon, and the crystal-2 V photon (delayed by t_v). Photons from the same
// crystal share one sampled timing offset, so same-pair overlaps are immune
// to the jitter while cross-pair overlaps degrade with it; the effective
// pair indistinguishability E/A is read off the wings of a delay scan.
namespace noonsim::source {

using temporal::PhotonEnsemble;

struct SourceConfig {
  double sigma = 44.0;        // packet width, micrometers of optical path
  double jitter_s = 0.0;      // per-crystal timing jitter (same units)
  double mu_spatial = 1.0;    // spatial mode match in [0,1]
  double t_h = 0.0;           // delay between the two H photons
  double t_v = 0.0;           // V-photon delay relative to the crystal-2 H photon
  std::int64_t mc_samples = 20000;
  std::uint64_t seed = 0x6e6f6f6e73696dULL;

  void validate() const;
};

struct GatedEvent {
  double pair1_offset = 0.0;
  double pair2_offset = 0.0;
  PhotonEnsemble ensemble;
};

struct RateEstimate {
  double value = 0.0;
  double stderror = 0.0;
};

struct EAEstimate {
  enum class Method { wings, dip2, v3 };
  double value = 0.0;
  Method method = Method::wings;
  double stderror = 0.0;
};

/// Thrown when the Monte Carlo wings estimate is too noisy to report.
class UnstableEstimate : public std::runtime_error {
 public:
  UnstableEstimate(const std::string& what, double se)
      : std::runtime_error(what), stderror(se) {}
  double stderror;
};

/// Three-photon ensemble for one sampled pair of crystal offsets. Centers are
/// {t_h + tau1, tau2, t_v + tau2}; the crystal-1 V photon only triggers the
/// gate and never appears in the ensemble.
GatedEvent build_event(const SourceConfig& cfg, double tau1, double tau2);

/// Gated four-fold rate: the jitter average of the three-fold projector rate.
/// jitter_s == 0 short-circuits to one deterministic evaluation.
RateEstimate fourfold_rate(const SourceConfig& cfg);

struct ScanResult {
  std::vector<double> tv;
  std::vector<double> rate;
  std::vector<double> stderror;
  std::vector<double> r2x2;      // independent-pairs four-fold estimate
  std::vector<double> two_ab;    // crystal-2 pair two-folds between arm pairs
  std::vector<double> two_ac;
  std::vector<double> two_bc;
};

/// Four-fold rate over a t_v grid, with the pairwise two-fold curves and the
/// independent-pairs estimate. Jitter draws are shared across grid points
/// (common random numbers), so curves are smooth and any thread count gives
/// bit-identical results.
ScanResult scan_tv(const SourceConfig& cfg, const std::vector<double>& tv_grid,
                   int threads = 1);

/// (R_AB R_CD + R_AC R_BD + R_AD R_BC) / r0, with D the gate detector.
double accidental_fourfold(double r_ab, double r_ac, double r_bc, double r_ad,
                           double r_bd, double r_cd, double r0);

/// Routing probability of a lone H photon into one projector arm; the
/// gate-pair two-folds factor into this times the (unit) trigger rate.
double gate_pair_rate(int n_arms);

/// Wings-ratio estimate of E/A: runs a t_h = 0 scan at perfect spatial match
/// and returns mean(signal / accidental over the wings) - 1. Spatial match is
/// forced to 1 because E/A characterizes the source's pair timing, not the
/// interferometer alignment (and the jitter_s = 0 limit must give exactly 1).
EAEstimate effective_ea(const SourceConfig& cfg);

/// Inverts the monotone map jitter_s -> E/A by bisection on the seeded
/// pair-delay estimator (the same quantity the scan wings measure).
double calibrate_jitter(double sigma, double target_ea, std::uint64_t seed,
                        std::int64_t samples);

/// Direct seeded estimate of E/A for a given jitter (used by the calibrator).
double pair_indistinguishability(double sigma, double jitter_s, std::uint64_t seed,
                                 std::int64_t samples);

}  // namespace noonsim::source
