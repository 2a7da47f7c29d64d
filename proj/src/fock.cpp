#include "noonsim/fock.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace noonsim::fock {

namespace {

constexpr double kNormTolerance = 1e-9;

// Coefficients c[j] of x^j y^(n-j) in prod_k (h_k x + v_k y).
std::vector<Complex> expand_arm_product(const ProjectorNetwork& net) {
  std::vector<Complex> coeffs{Complex{1.0, 0.0}};
  for (int k = 0; k < net.n_arms(); ++k) {
    std::vector<Complex> next(coeffs.size() + 1, Complex{0.0, 0.0});
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      next[j + 1] += coeffs[j] * net.amp_h(k);
      next[j] += coeffs[j] * net.amp_v(k);
    }
    coeffs = std::move(next);
  }
  return coeffs;
}

}  // namespace

double factorial(int n) {
  if (n < 0 || n > 20) throw std::invalid_argument("factorial: n out of range");
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return static_cast<double>(f);
}

FockStateHV::FockStateHV(int n_total, std::vector<Complex> amps) {
  if (n_total < 1) throw std::invalid_argument("FockStateHV: photon number must be positive");
  if (amps.size() != static_cast<std::size_t>(n_total) + 1)
    throw std::invalid_argument("FockStateHV: need exactly N+1 amplitudes");
  double nsq = 0.0;
  for (const auto& a : amps) nsq += std::norm(a);
  if (nsq <= 0.0) throw std::invalid_argument("FockStateHV: zero state");
  const double scale = 1.0 / std::sqrt(nsq);
  for (auto& a : amps) a *= scale;
  n_ = n_total;
  amps_ = std::move(amps);
}

FockStateHV FockStateHV::basis(int n_total, int k) {
  if (k < 0 || k > n_total) throw std::invalid_argument("FockStateHV::basis: k out of range");
  std::vector<Complex> amps(static_cast<std::size_t>(n_total) + 1, Complex{0.0, 0.0});
  amps[static_cast<std::size_t>(k)] = 1.0;
  return FockStateHV(n_total, std::move(amps));
}

FockStateHV FockStateHV::noon(int n_total) {
  std::vector<Complex> amps(static_cast<std::size_t>(n_total) + 1, Complex{0.0, 0.0});
  const double r = 1.0 / std::sqrt(2.0);
  amps.front() = -r;
  amps.back() = r;
  return FockStateHV(n_total, std::move(amps));
}

FockStateHV FockStateHV::raw(int n_total, std::vector<Complex> amps) {
  if (amps.size() != static_cast<std::size_t>(n_total) + 1)
    throw std::invalid_argument("FockStateHV::raw: need exactly N+1 amplitudes");
  FockStateHV s;
  s.n_ = n_total;
  s.amps_ = std::move(amps);
  return s;
}

double FockStateHV::norm_squared() const {
  double nsq = 0.0;
  for (const auto& a : amps_) nsq += std::norm(a);
  return nsq;
}

ProjectorNetwork::ProjectorNetwork(int n_arms) : n_(n_arms) {
  if (n_arms < 2) throw std::invalid_argument("ProjectorNetwork: need at least 2 arms");
  const double a = 1.0 / std::sqrt(2.0 * n_arms);
  amp_h_.reserve(static_cast<std::size_t>(n_arms));
  amp_v_.reserve(static_cast<std::size_t>(n_arms));
  for (int k = 0; k < n_arms; ++k) {
    const double delta = phase(k);
    amp_h_.emplace_back(a, 0.0);
    amp_v_.push_back(-a * std::polar(1.0, delta));
  }
}

double ProjectorNetwork::phase(int arm) const {
  if (arm < 0 || arm >= n_) throw std::invalid_argument("ProjectorNetwork: arm out of range");
  return 2.0 * std::numbers::pi * arm / n_;
}

ProjectorNetwork build_projector(int n) { return ProjectorNetwork(n); }

double product_identity_residual(int n) {
  if (n < 2) throw std::invalid_argument("product_identity_residual: n must be >= 2");
  const ProjectorNetwork net(n);
  std::vector<Complex> coeffs = expand_arm_product(net);
  const double target = std::pow(2.0 * n, -0.5 * n);
  coeffs[static_cast<std::size_t>(n)] -= target;
  coeffs[0] += target;
  double residual = 0.0;
  for (const auto& c : coeffs) residual = std::max(residual, std::abs(c));
  return residual;
}

double n_fold_rate(const FockStateHV& state, const ProjectorNetwork& net) {
  if (state.n_total() != net.n_arms())
    throw std::invalid_argument("n_fold_rate: photon number must match arm count");
  const int n = net.n_arms();
  const std::vector<Complex> coeffs = expand_arm_product(net);
  // a_H^j a_V^(N-j) |k, N-k> survives only for k = j and contributes
  // sqrt(j! (N-j)!) |0,0>.
  Complex amp{0.0, 0.0};
  for (int j = 0; j <= n; ++j) {
    amp += state.amp(j) * coeffs[static_cast<std::size_t>(j)] *
           std::sqrt(factorial(j) * factorial(n - j));
  }
  return std::norm(amp);
}

double noon_projection_rate(const FockStateHV& state) {
  if (std::fabs(state.norm_squared() - 1.0) > kNormTolerance)
    throw std::invalid_argument("noon_projection_rate: state is not normalized");
  const int n = state.n_total();
  // 2 N! |<state|NOON>|^2 / (2N)^N with <state|NOON> = (c_N - c_0)/sqrt(2).
  const Complex diff = state.amp(n) - state.amp(0);
  return factorial(n) * std::norm(diff) / std::pow(2.0 * n, n);
}

FringeModel FringeModel::from_amplitudes(Complex c0, Complex cn, int n) {
  FringeModel m;
  m.c0 = c0;
  m.cn = cn;
  m.n = n;
  m.delta0 = (std::abs(c0) > 0.0 && std::abs(cn) > 0.0) ? std::arg(c0) - std::arg(cn) : 0.0;
  return m;
}

std::vector<double> fringe_scan(const FringeModel& model, std::span<const double> deltas) {
  if (deltas.empty()) throw std::invalid_argument("fringe_scan: empty delta grid");
  const double p0 = std::norm(model.c0);
  const double pn = std::norm(model.cn);
  const double cross = 2.0 * std::abs(model.c0) * std::abs(model.cn);
  std::vector<double> rates;
  rates.reserve(deltas.size());
  for (double d : deltas) {
    const double r = p0 + pn - cross * std::cos(model.n * d + model.delta0);
    rates.push_back(std::max(0.0, r));
  }
  return rates;
}

}  // namespace noonsim::fock
