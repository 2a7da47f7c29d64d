#pragma once

#include <complex>
#include <vector>

#include "noonsim/fock.hpp"

// Coincidence rates for partially distinguishable photons sent through the
// projector. Distinguishability enters through the ensemble Gram matrix
// S[i][j] = spatial_match * <phi_i|phi_j>; the detection pattern rate is the
// permutation-pair sum
//
//   R = sum_{sigma,tau in S_N} prod_k U[d_k, pol(sigma k)]
//                                     conj(U[d_k, pol(tau k)]) S[tau k, sigma k]
//
// in the production-amplitude convention (no division by the state norm), so
// bosonic pair-emission enhancement shows up in the rates exactly as it does
// in measured coincidence counts.
namespace noonsim::temporal {

using Complex = std::complex<double>;
using fock::ProjectorNetwork;

enum class Polarization { H, V };

/// Gaussian temporal mode exp(-(t-center)^2/(4 sigma^2)), centers and widths
/// in micrometers of optical path (the cT convention).
struct WavePacket {
  double center = 0.0;
  double width_sigma = 1.0;
};

/// Overlap integral <phi_a|phi_b>; real by convention (no carrier phase).
/// Equal widths give exp(-dt^2/(8 sigma^2)).
double overlap(const WavePacket& a, const WavePacket& b);

struct Photon {
  Polarization pol = Polarization::H;
  WavePacket packet;
  int origin = 1;  // crystal tag, 1 or 2
};

using GramMatrix = std::vector<std::vector<Complex>>;

/// Photons plus their Gram matrix. Validated on construction: Hermitian with
/// unit diagonal, entries bounded by 1, positive semidefinite to a 1e-10
/// eigenvalue floor.
class PhotonEnsemble {
 public:
  /// Gram from packet overlaps with every cross-photon entry scaled by mu.
  static PhotonEnsemble make(std::vector<Photon> photons, double mu_spatial = 1.0);

  /// Explicit Gram (still validated).
  static PhotonEnsemble with_gram(std::vector<Photon> photons, GramMatrix gram);

  int size() const { return static_cast<int>(photons_.size()); }
  const std::vector<Photon>& photons() const { return photons_; }
  const GramMatrix& gram() const { return gram_; }
  Polarization pol(int i) const { return photons_[static_cast<std::size_t>(i)].pol; }

 private:
  PhotonEnsemble() = default;
  std::vector<Photon> photons_;
  GramMatrix gram_;
};

/// Arm indices (0-based), one entry per detected photon; repeats allowed.
struct DetectionPattern {
  std::vector<int> arms;
};

/// Rate for the given detection pattern. Result is real up to roundoff;
/// values in [-1e-10, 0) are clamped to zero, anything more negative throws.
double coincidence_rate(const PhotonEnsemble& ens, const ProjectorNetwork& net,
                        const DetectionPattern& pattern);

/// One photon in every arm; the quantity scanned against the V-photon delay.
double nfold_projector_rate(const PhotonEnsemble& ens, const ProjectorNetwork& net);

/// Probability that arms j and k each fire at least once, remaining photons
/// marginalized over all fates (other arms and the per-arm polarizer loss
/// ports). Patterns with repeated modes carry the bosonic 1/prod(n_m!) factor.
double two_fold_inclusive_rate(const PhotonEnsemble& ens, const ProjectorNetwork& net,
                               int j, int k);

/// Two-photon H/V probe on the 3-arm network: two-fold dip visibility with
/// cross Gram entries scaled by mu, divided by the ideal 50%.
double spatial_match_calibration(double mu);

/// Inverse of the calibration curve by bisection.
double spatial_match_for_beta(double beta);

namespace detail {

/// Literal (sigma, tau) double sum; reference implementation for tests.
Complex coincidence_sum_naive(const PhotonEnsemble& ens, const ProjectorNetwork& net,
                              const DetectionPattern& pattern);

/// Pattern rate factored by relative permutation: caches the network-side
/// weights once, then each Gram evaluation costs N! products.
class PairingRate {
 public:
  PairingRate(const ProjectorNetwork& net, const std::vector<Polarization>& pols,
              const std::vector<int>& pattern);

  Complex eval(const GramMatrix& gram) const;
  double eval_real(const double* gram_row_major, int n) const;

 private:
  int n_;
  std::vector<std::vector<int>> pairings_;
  std::vector<Complex> weights_;
};

/// Smallest eigenvalue of a Hermitian matrix (real-embedding Jacobi).
double min_eigenvalue_hermitian(const GramMatrix& m);

}  // namespace detail

}  // namespace noonsim::temporal
