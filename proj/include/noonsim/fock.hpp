#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

// Exact two-mode Fock algebra for the N-arm NOON projector: detection rates,
// NOON projection probabilities and de Broglie fringes, all as absolute
// probabilities so results are directly comparable across modules.
namespace noonsim::fock {

using Complex = std::complex<double>;

/// N! as an exact integer, converted to double (valid through N = 20).
double factorial(int n);

/// Two-mode photon-number state sum_k c_k |k>_H |N-k>_V.
/// Amplitudes are normalized on construction.
class FockStateHV {
 public:
  FockStateHV(int n_total, std::vector<Complex> amps);

  /// Basis state |k>_H |N-k>_V.
  static FockStateHV basis(int n_total, int k);

  /// The NOON state (|N,0> - |0,N>)/sqrt(2).
  static FockStateHV noon(int n_total);

  /// Bypasses normalization; only for exercising error paths.
  static FockStateHV raw(int n_total, std::vector<Complex> amps);

  int n_total() const { return n_; }
  const std::vector<Complex>& amps() const { return amps_; }
  Complex amp(int k) const { return amps_[static_cast<std::size_t>(k)]; }
  double norm_squared() const;

 private:
  FockStateHV() = default;
  int n_ = 0;
  std::vector<Complex> amps_;
};

/// The N-arm projector geometry: arm k detects (a_H - a_V e^{i delta_k}) /
/// sqrt(2N) with delta_k = 2 pi (k-1) / N. The polarizer-rejected light in
/// each arm goes to one orthogonal loss mode whose amplitudes are fixed by
/// unitarity of the arm.
class ProjectorNetwork {
 public:
  explicit ProjectorNetwork(int n_arms);

  int n_arms() const { return n_; }
  double phase(int arm) const;

  /// Detector-port amplitude for one input polarization (H or V).
  Complex amp_h(int arm) const { return amp_h_[static_cast<std::size_t>(arm)]; }
  Complex amp_v(int arm) const { return amp_v_[static_cast<std::size_t>(arm)]; }

  /// Loss-port amplitudes (the 45-degree polarizer rejection).
  Complex loss_amp_h(int arm) const { return amp_h_[static_cast<std::size_t>(arm)]; }
  Complex loss_amp_v(int arm) const { return -amp_v_[static_cast<std::size_t>(arm)]; }

 private:
  int n_;
  std::vector<Complex> amp_h_;
  std::vector<Complex> amp_v_;
};

/// Builds the N-arm projector. Throws std::invalid_argument for n < 2.
ProjectorNetwork build_projector(int n);

/// Max-norm residual between the expanded polynomial
/// prod_k (x - y e^{i delta_k}) / sqrt(2N) and (x^N - y^N) / (2N)^{N/2}.
double product_identity_residual(int n);

/// N-fold detection rate <prod b^dag prod b> by direct Fock-basis expansion:
/// apply every arm operator to the state and return the squared norm.
double n_fold_rate(const FockStateHV& state, const ProjectorNetwork& net);

/// Projection route for the same rate: 2 N! |<state|NOON>|^2 / (2N)^N.
/// Agrees with n_fold_rate to 1e-12; the equivalence is this module's
/// central invariant.
double noon_projection_rate(const FockStateHV& state);

/// Fringe rate |c0|^2 + |cN|^2 - 2|c0 cN| cos(N delta + delta0) as a function
/// of the H/V phase delta. delta0 comes from the amplitude phases, never from
/// a fit.
struct FringeModel {
  Complex c0;
  Complex cn;
  double delta0 = 0.0;
  int n = 2;

  static FringeModel from_amplitudes(Complex c0, Complex cn, int n);
};

std::vector<double> fringe_scan(const FringeModel& model, std::span<const double> deltas);

}  // namespace noonsim::fock
