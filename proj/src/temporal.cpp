#include "noonsim/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace noonsim::temporal {

namespace {

constexpr double kImagTolerance = 1e-10;
constexpr double kNegativeTolerance = 1e-10;
constexpr double kPsdFloor = 1e-10;

std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::vector<int>> perms;
  do {
    perms.push_back(idx);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return perms;
}

Complex detector_amp(const ProjectorNetwork& net, int arm, Polarization p) {
  return p == Polarization::H ? net.amp_h(arm) : net.amp_v(arm);
}

// Output modes 0..N-1 are the detectors, N..2N-1 the per-arm loss ports.
Complex output_amp(const ProjectorNetwork& net, int mode, Polarization p) {
  const int n = net.n_arms();
  if (mode < n) return detector_amp(net, mode, p);
  const int arm = mode - n;
  return p == Polarization::H ? net.loss_amp_h(arm) : net.loss_amp_v(arm);
}

void check_pattern(const PhotonEnsemble& ens, const ProjectorNetwork& net,
                   const DetectionPattern& pattern) {
  if (static_cast<int>(pattern.arms.size()) != ens.size())
    throw std::invalid_argument("coincidence_rate: pattern size must match photon count");
  for (int a : pattern.arms)
    if (a < 0 || a >= net.n_arms())
      throw std::invalid_argument("coincidence_rate: arm index out of range");
}

double finalize_rate(Complex sum) {
  if (std::fabs(sum.imag()) > kImagTolerance * std::max(1.0, std::fabs(sum.real())))
    throw std::runtime_error("coincidence rate has non-negligible imaginary part");
  const double r = sum.real();
  if (r < -kNegativeTolerance)
    throw std::runtime_error("coincidence rate is negative beyond roundoff tolerance");
  return std::max(0.0, r);
}

// Bare pattern sum over explicit output-mode slots (detectors and loss ports).
Complex pattern_sum(const PhotonEnsemble& ens, const ProjectorNetwork& net,
                    const std::vector<int>& slots,
                    const std::vector<std::vector<int>>& perms) {
  const int n = ens.size();
  const GramMatrix& s = ens.gram();
  Complex total{0.0, 0.0};
  for (const auto& sig : perms) {
    for (const auto& tau : perms) {
      Complex term{1.0, 0.0};
      for (int l = 0; l < n; ++l) {
        const int mode = slots[static_cast<std::size_t>(l)];
        term *= output_amp(net, mode, ens.pol(sig[static_cast<std::size_t>(l)])) *
                std::conj(output_amp(net, mode, ens.pol(tau[static_cast<std::size_t>(l)]))) *
                s[static_cast<std::size_t>(tau[static_cast<std::size_t>(l)])]
                 [static_cast<std::size_t>(sig[static_cast<std::size_t>(l)])];
      }
      total += term;
    }
  }
  return total;
}

void enumerate_completions(int remaining, int first_mode, int mode_count,
                           std::vector<int>& current,
                           const std::function<void(const std::vector<int>&)>& emit) {
  if (remaining == 0) {
    emit(current);
    return;
  }
  for (int m = first_mode; m < mode_count; ++m) {
    current.push_back(m);
    enumerate_completions(remaining - 1, m, mode_count, current, emit);
    current.pop_back();
  }
}

}  // namespace

double overlap(const WavePacket& a, const WavePacket& b) {
  if (a.width_sigma <= 0.0 || b.width_sigma <= 0.0)
    throw std::invalid_argument("overlap: packet widths must be positive");
  const double sa2 = a.width_sigma * a.width_sigma;
  const double sb2 = b.width_sigma * b.width_sigma;
  const double dt = a.center - b.center;
  const double pref = std::sqrt(2.0 * a.width_sigma * b.width_sigma / (sa2 + sb2));
  return pref * std::exp(-dt * dt / (4.0 * (sa2 + sb2)));
}

PhotonEnsemble PhotonEnsemble::make(std::vector<Photon> photons, double mu_spatial) {
  if (mu_spatial < 0.0 || mu_spatial > 1.0)
    throw std::invalid_argument("PhotonEnsemble: spatial match must be in [0,1]");
  const std::size_t n = photons.size();
  if (n == 0) throw std::invalid_argument("PhotonEnsemble: empty photon list");
  GramMatrix gram(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i) {
    gram[i][i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = mu_spatial * overlap(photons[i].packet, photons[j].packet);
      gram[i][j] = s;
      gram[j][i] = s;
    }
  }
  return with_gram(std::move(photons), std::move(gram));
}

PhotonEnsemble PhotonEnsemble::with_gram(std::vector<Photon> photons, GramMatrix gram) {
  const std::size_t n = photons.size();
  if (n == 0) throw std::invalid_argument("PhotonEnsemble: empty photon list");
  if (gram.size() != n) throw std::invalid_argument("PhotonEnsemble: gram size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (gram[i].size() != n) throw std::invalid_argument("PhotonEnsemble: gram size mismatch");
    if (std::abs(gram[i][i] - Complex{1.0, 0.0}) > 1e-12)
      throw std::invalid_argument("PhotonEnsemble: gram diagonal must be 1");
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(gram[i][j] - std::conj(gram[j][i])) > 1e-12)
        throw std::invalid_argument("PhotonEnsemble: gram must be Hermitian");
      if (std::abs(gram[i][j]) > 1.0 + 1e-12)
        throw std::invalid_argument("PhotonEnsemble: gram entries must be bounded by 1");
    }
  }
  if (detail::min_eigenvalue_hermitian(gram) < -kPsdFloor)
    throw std::invalid_argument("PhotonEnsemble: gram is not positive semidefinite");
  PhotonEnsemble e;
  e.photons_ = std::move(photons);
  e.gram_ = std::move(gram);
  return e;
}

double coincidence_rate(const PhotonEnsemble& ens, const ProjectorNetwork& net,
                        const DetectionPattern& pattern) {
  check_pattern(ens, net, pattern);
  std::vector<Polarization> pols;
  pols.reserve(static_cast<std::size_t>(ens.size()));
  for (const auto& p : ens.photons()) pols.push_back(p.pol);
  const detail::PairingRate cached(net, pols, pattern.arms);
  return finalize_rate(cached.eval(ens.gram()));
}

double nfold_projector_rate(const PhotonEnsemble& ens, const ProjectorNetwork& net) {
  if (ens.size() != net.n_arms())
    throw std::invalid_argument("nfold_projector_rate: photon count must match arm count");
  DetectionPattern pattern;
  pattern.arms.resize(static_cast<std::size_t>(net.n_arms()));
  std::iota(pattern.arms.begin(), pattern.arms.end(), 0);
  return coincidence_rate(ens, net, pattern);
}

double two_fold_inclusive_rate(const PhotonEnsemble& ens, const ProjectorNetwork& net,
                               int j, int k) {
  const int n_arms = net.n_arms();
  if (j == k) throw std::invalid_argument("two_fold_inclusive_rate: arms must differ");
  if (j < 0 || j >= n_arms || k < 0 || k >= n_arms)
    throw std::invalid_argument("two_fold_inclusive_rate: arm index out of range");
  const int p = ens.size();
  if (p < 2) throw std::invalid_argument("two_fold_inclusive_rate: need at least 2 photons");

  const auto perms = all_permutations(p);
  const int mode_count = 2 * n_arms;
  double total = 0.0;
  std::vector<int> completion;
  std::function<void(const std::vector<int>&)> emit = [&](const std::vector<int>& extra) {
    std::vector<int> slots{j, k};
    slots.insert(slots.end(), extra.begin(), extra.end());
    std::vector<int> counts(static_cast<std::size_t>(mode_count), 0);
    for (int m : slots) ++counts[static_cast<std::size_t>(m)];
    double mult = 1.0;
    for (int c : counts)
      for (int f = 2; f <= c; ++f) mult *= f;
    total += finalize_rate(pattern_sum(ens, net, slots, perms)) / mult;
  };
  enumerate_completions(p - 2, 0, mode_count, completion, emit);
  return total;
}

double spatial_match_calibration(double mu) {
  if (mu < 0.0 || mu > 1.0)
    throw std::invalid_argument("spatial_match_calibration: mu must be in [0,1]");
  const ProjectorNetwork net(3);
  const std::vector<Photon> photons{{Polarization::H, {0.0, 1.0}, 1},
                                    {Polarization::V, {0.0, 1.0}, 2}};
  auto probe = [&](double cross) {
    GramMatrix gram{{Complex{1.0, 0.0}, Complex{cross, 0.0}},
                    {Complex{cross, 0.0}, Complex{1.0, 0.0}}};
    return two_fold_inclusive_rate(PhotonEnsemble::with_gram(photons, gram), net, 0, 1);
  };
  const double dip = probe(mu);
  const double far = probe(0.0);
  const double visibility = 1.0 - dip / far;
  return visibility / 0.5;
}

double spatial_match_for_beta(double beta) {
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("spatial_match_for_beta: beta must be in [0,1]");
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (spatial_match_calibration(mid) < beta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

Complex coincidence_sum_naive(const PhotonEnsemble& ens, const ProjectorNetwork& net,
                              const DetectionPattern& pattern) {
  check_pattern(ens, net, pattern);
  return pattern_sum(ens, net, pattern.arms, all_permutations(ens.size()));
}

PairingRate::PairingRate(const ProjectorNetwork& net, const std::vector<Polarization>& pols,
                         const std::vector<int>& pattern)
    : n_(static_cast<int>(pattern.size())) {
  const auto perms = all_permutations(n_);
  pairings_ = perms;
  weights_.assign(pairings_.size(), Complex{0.0, 0.0});
  // W(rho) = sum_sigma prod_k U[d_k, pol(sigma k)] conj(U[d_k, pol(rho sigma k)]).
  for (std::size_t r = 0; r < pairings_.size(); ++r) {
    const auto& rho = pairings_[r];
    Complex w{0.0, 0.0};
    for (const auto& sig : perms) {
      Complex term{1.0, 0.0};
      for (int kk = 0; kk < n_; ++kk) {
        const int arm = pattern[static_cast<std::size_t>(kk)];
        const int fwd = sig[static_cast<std::size_t>(kk)];
        const int bwd = rho[static_cast<std::size_t>(fwd)];
        term *= detector_amp(net, arm, pols[static_cast<std::size_t>(fwd)]) *
                std::conj(detector_amp(net, arm, pols[static_cast<std::size_t>(bwd)]));
      }
      w += term;
    }
    weights_[r] = w;
  }
}

Complex PairingRate::eval(const GramMatrix& gram) const {
  Complex total{0.0, 0.0};
  for (std::size_t r = 0; r < pairings_.size(); ++r) {
    const auto& rho = pairings_[r];
    Complex prod{1.0, 0.0};
    for (int i = 0; i < n_; ++i)
      prod *= gram[static_cast<std::size_t>(rho[static_cast<std::size_t>(i)])]
                  [static_cast<std::size_t>(i)];
    total += weights_[r] * prod;
  }
  return total;
}

double PairingRate::eval_real(const double* gram_row_major, int n) const {
  Complex total{0.0, 0.0};
  for (std::size_t r = 0; r < pairings_.size(); ++r) {
    const auto& rho = pairings_[r];
    double prod = 1.0;
    for (int i = 0; i < n_; ++i) prod *= gram_row_major[rho[static_cast<std::size_t>(i)] * n + i];
    total += weights_[r] * prod;
  }
  return finalize_rate(total);
}

double min_eigenvalue_hermitian(const GramMatrix& m) {
  // Embed the Hermitian matrix H = A + iB as the real symmetric
  // [[A, -B], [B, A]]; its spectrum is that of H, doubled.
  const int n = static_cast<int>(m.size());
  const int d = 2 * n;
  std::vector<double> a(static_cast<std::size_t>(d) * d, 0.0);
  auto at = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r) * d + c]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double re = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].real();
      const double im = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].imag();
      at(i, j) = re;
      at(i + n, j + n) = re;
      at(i, j + n) = -im;
      at(i + n, j) = im;
    }
  }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += at(p, q) * at(p, q);
    if (off < 1e-28) break;
    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double apq = at(p, q);
        if (std::fabs(apq) < 1e-30) continue;
        const double theta = 0.5 * (at(q, q) - at(p, p)) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < d; ++i) {
          const double aip = at(i, p), aiq = at(i, q);
          at(i, p) = c * aip - s * aiq;
          at(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < d; ++i) {
          const double api = at(p, i), aqi = at(q, i);
          at(p, i) = c * api - s * aqi;
          at(q, i) = s * api + c * aqi;
        }
      }
    }
  }
  double lo = at(0, 0);
  for (int i = 1; i < d; ++i) lo = std::min(lo, at(i, i));
  return lo;
}

}  // namespace detail

}  // namespace noonsim::temporal
