#include "noonsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace noonsim::analysis {

namespace {

constexpr double kFourLn2 = 4.0 * 0.6931471805599453;
constexpr double kParamTolerance = 1e-8;
constexpr int kMaxIterations = 200;

// Parameter vector layout: [B, (V, c, w) per dip].
struct Problem {
  const ScanCurve* curve = nullptr;
  int n_dips = 0;
  double x_range = 1.0;
  double err_floor = 0.0;

  int n_params() const { return 1 + 3 * n_dips; }

  double model(const std::vector<double>& p, double x) const {
    double y = p[0];
    for (int d = 0; d < n_dips; ++d) {
      const double v = p[static_cast<std::size_t>(1 + 3 * d)];
      const double c = p[static_cast<std::size_t>(2 + 3 * d)];
      const double w = p[static_cast<std::size_t>(3 + 3 * d)];
      const double u = (x - c) / w;
      y *= 1.0 - v * std::exp(-kFourLn2 * u * u);
    }
    return y;
  }

  // Error bars are floored at 1% of the largest one: stated errors far below
  // the dip-model shape error (or exact zeros from deterministic points)
  // would otherwise concentrate all the weight on a few samples.
  double weight(std::size_t i) const {
    if (curve->yerr.empty()) return 1.0;
    return 1.0 / std::max(curve->yerr[i], err_floor);
  }

  void residuals(const std::vector<double>& p, std::vector<double>& r) const {
    const std::size_t n = curve->x.size();
    r.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = weight(i) * (curve->y[i] - model(p, curve->x[i]));
  }

  double sse(const std::vector<double>& p) const {
    std::vector<double> r;
    residuals(p, r);
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
  }

  // Natural scale of each parameter, used for difference steps and for the
  // relative-change convergence test.
  double scale(int j, const std::vector<double>& p) const {
    if (j == 0) return std::max(std::fabs(p[0]), 1e-12);
    const int kind = (j - 1) % 3;
    if (kind == 0) return 1.0;
    return std::max(x_range, 1e-12);
  }

  void clamp(std::vector<double>& p) const {
    const double w_min = x_range * 1e-4;
    const double x_lo = curve->x.front() - 0.5 * x_range;
    const double x_hi = curve->x.back() + 0.5 * x_range;
    for (int d = 0; d < n_dips; ++d) {
      double& v = p[static_cast<std::size_t>(1 + 3 * d)];
      double& c = p[static_cast<std::size_t>(2 + 3 * d)];
      double& w = p[static_cast<std::size_t>(3 + 3 * d)];
      v = std::clamp(v, 0.0, 1.0);
      c = std::clamp(c, x_lo, x_hi);
      w = std::clamp(std::fabs(w), w_min, 10.0 * x_range);
    }
  }
};

bool solve_normal_equations(std::vector<std::vector<double>> a, std::vector<double> b,
                            std::vector<double>& out) {
  const int n = static_cast<int>(b.size());
  out.assign(static_cast<std::size_t>(n), 0.0);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
          std::fabs(a[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)]))
        pivot = r;
    if (std::fabs(a[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)]) < 1e-300)
      return false;
    std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(pivot)]);
    std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(pivot)]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                       a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
      for (int c = col; c < n; ++c)
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
            f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c)
      s -= a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * out[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = s / a[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)];
  }
  return true;
}

std::vector<double> moving_average(const std::vector<double>& y, int radius) {
  const int n = static_cast<int>(y.size());
  std::vector<double> out(y.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - radius);
    const int hi = std::min(n - 1, i + radius);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += y[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s / (hi - lo + 1);
  }
  return out;
}

double upper_quartile_mean(const std::vector<double>& y) {
  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t take = std::max<std::size_t>(3, sorted.size() / 4);
  const std::size_t n = std::min(take, sorted.size());
  return std::accumulate(sorted.begin(), sorted.begin() + static_cast<long>(n), 0.0) /
         static_cast<double>(n);
}

// Centers seed: the lowest local minima of the smoothed curve, kept apart by
// an eighth of the grid span.
std::vector<double> seed_centers(const ScanCurve& curve, int n_dips, double x_range) {
  const std::vector<double> smooth = moving_average(curve.y, 2);
  const int n = static_cast<int>(smooth.size());
  std::vector<int> minima;
  for (int i = 1; i + 1 < n; ++i) {
    if (smooth[static_cast<std::size_t>(i)] <= smooth[static_cast<std::size_t>(i - 1)] &&
        smooth[static_cast<std::size_t>(i)] <= smooth[static_cast<std::size_t>(i + 1)])
      minima.push_back(i);
  }
  std::sort(minima.begin(), minima.end(), [&](int a, int b) {
    return smooth[static_cast<std::size_t>(a)] < smooth[static_cast<std::size_t>(b)];
  });
  std::vector<double> centers;
  const double min_sep = x_range / 8.0;
  for (int idx : minima) {
    if (static_cast<int>(centers.size()) == n_dips) break;
    const double cx = curve.x[static_cast<std::size_t>(idx)];
    bool clash = false;
    for (double c : centers) clash |= std::fabs(c - cx) < min_sep;
    if (!clash) centers.push_back(cx);
  }
  // Degenerate curves (flat, or fewer minima than dips): spread the rest.
  int fallback = 0;
  while (static_cast<int>(centers.size()) < n_dips) {
    const double cx =
        curve.x.front() + x_range * (0.25 + 0.5 * fallback / std::max(1, n_dips - 1));
    centers.push_back(cx);
    ++fallback;
  }
  return centers;
}

double seed_width(const ScanCurve& curve, const std::vector<double>& smooth, double center,
                  double baseline, double x_range) {
  // Distance from the center to the half-depth crossing, doubled.
  const std::size_t n = curve.x.size();
  std::size_t ci = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::fabs(curve.x[i] - center) < std::fabs(curve.x[ci] - center)) ci = i;
  const double depth = baseline - smooth[ci];
  if (depth <= 0.0) return x_range / 10.0;
  const double half = baseline - 0.5 * depth;
  double left = curve.x.front(), right = curve.x.back();
  for (std::size_t i = ci; i < n; ++i)
    if (smooth[i] >= half) {
      right = curve.x[i];
      break;
    }
  for (std::size_t i = ci + 1; i-- > 0;)
    if (smooth[i] >= half) {
      left = curve.x[i];
      break;
    }
  const double w = right - left;
  const double w_min = 2.0 * (curve.x[1] - curve.x[0]);
  return std::clamp(w, w_min, x_range);
}

DipFit pack_fit(const Problem& prob, const std::vector<double>& p) {
  DipFit fit;
  fit.baseline = p[0];
  for (int d = 0; d < prob.n_dips; ++d) {
    DipFit::Dip dip;
    const double v = std::clamp(p[static_cast<std::size_t>(1 + 3 * d)], 0.0, 1.0);
    dip.depth = v * fit.baseline;
    dip.center = p[static_cast<std::size_t>(2 + 3 * d)];
    dip.fwhh = p[static_cast<std::size_t>(3 + 3 * d)];
    dip.center_determined = v > 5e-3 && dip.fwhh < prob.x_range;
    fit.dips.push_back(dip);
  }
  std::sort(fit.dips.begin(), fit.dips.end(),
            [](const DipFit::Dip& a, const DipFit::Dip& b) { return a.center < b.center; });
  // Plain (unweighted) rms of the fit residuals.
  double sse = 0.0;
  for (std::size_t i = 0; i < prob.curve->x.size(); ++i) {
    const double d = prob.curve->y[i] - prob.model(p, prob.curve->x[i]);
    sse += d * d;
  }
  fit.residual_rms = std::sqrt(sse / static_cast<double>(prob.curve->x.size()));
  return fit;
}

}  // namespace

void ScanCurve::validate() const {
  if (x.size() != y.size()) throw std::invalid_argument("ScanCurve: x/y length mismatch");
  if (!yerr.empty() && yerr.size() != x.size())
    throw std::invalid_argument("ScanCurve: yerr length mismatch");
  if (x.size() < 2) throw std::invalid_argument("ScanCurve: need at least two points");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("ScanCurve: x must be strictly increasing");
}

double dip_model(const DipFit& fit, double x) {
  double y = fit.baseline;
  for (const auto& d : fit.dips) {
    const double v = fit.baseline > 0.0 ? d.depth / fit.baseline : 0.0;
    const double u = (x - d.center) / d.fwhh;
    y *= 1.0 - v * std::exp(-kFourLn2 * u * u);
  }
  return y;
}

DipFit fit_dips(const ScanCurve& curve, int n_dips,
                const std::optional<std::vector<double>>& init_centers) {
  curve.validate();
  if (n_dips != 1 && n_dips != 2)
    throw std::invalid_argument("fit_dips: n_dips must be 1 or 2");
  const int n_params = 1 + 3 * n_dips;
  if (static_cast<int>(curve.x.size()) < 8 * n_params)
    throw std::invalid_argument("fit_dips: need at least 8 points per fitted parameter");
  if (init_centers && static_cast<int>(init_centers->size()) != n_dips)
    throw std::invalid_argument("fit_dips: init centers must match n_dips");

  Problem prob;
  prob.curve = &curve;
  prob.n_dips = n_dips;
  prob.x_range = curve.x.back() - curve.x.front();
  if (!curve.yerr.empty()) {
    double max_err = 0.0;
    for (double e : curve.yerr) max_err = std::max(max_err, e);
    if (max_err <= 0.0) throw std::invalid_argument("fit_dips: yerr must have positive entries");
    prob.err_floor = 0.01 * max_err;
  }

  // Initial parameters.
  std::vector<double> p(static_cast<std::size_t>(n_params));
  const std::vector<double> smooth = moving_average(curve.y, 2);
  p[0] = upper_quartile_mean(curve.y);
  std::vector<double> centers = init_centers ? *init_centers : seed_centers(curve, n_dips, prob.x_range);
  std::sort(centers.begin(), centers.end());
  for (int d = 0; d < n_dips; ++d) {
    std::size_t ci = 0;
    for (std::size_t i = 1; i < curve.x.size(); ++i)
      if (std::fabs(curve.x[i] - centers[static_cast<std::size_t>(d)]) <
          std::fabs(curve.x[ci] - centers[static_cast<std::size_t>(d)]))
        ci = i;
    const double v0 = p[0] > 0.0 ? std::clamp(1.0 - smooth[ci] / p[0], 0.02, 0.98) : 0.1;
    p[static_cast<std::size_t>(1 + 3 * d)] = v0;
    p[static_cast<std::size_t>(2 + 3 * d)] = centers[static_cast<std::size_t>(d)];
    p[static_cast<std::size_t>(3 + 3 * d)] =
        seed_width(curve, smooth, centers[static_cast<std::size_t>(d)], p[0], prob.x_range);
  }
  prob.clamp(p);

  double sse = prob.sse(p);
  double lambda = 1e-3;
  std::vector<double> r;
  bool converged = false;

  for (int iter = 0; iter < kMaxIterations && !converged; ++iter) {
    prob.residuals(p, r);
    const std::size_t n_pts = r.size();

    // Central-difference Jacobian of the residuals.
    std::vector<std::vector<double>> jac(n_pts, std::vector<double>(static_cast<std::size_t>(n_params)));
    std::vector<double> rp, rm;
    for (int j = 0; j < n_params; ++j) {
      const double h = 1e-6 * prob.scale(j, p);
      std::vector<double> pp = p, pm = p;
      pp[static_cast<std::size_t>(j)] += h;
      pm[static_cast<std::size_t>(j)] -= h;
      prob.residuals(pp, rp);
      prob.residuals(pm, rm);
      for (std::size_t i = 0; i < n_pts; ++i)
        jac[i][static_cast<std::size_t>(j)] = (rp[i] - rm[i]) / (2.0 * h);
    }

    std::vector<std::vector<double>> jtj(static_cast<std::size_t>(n_params),
                                         std::vector<double>(static_cast<std::size_t>(n_params), 0.0));
    std::vector<double> jtr(static_cast<std::size_t>(n_params), 0.0);
    for (std::size_t i = 0; i < n_pts; ++i) {
      for (int a = 0; a < n_params; ++a) {
        jtr[static_cast<std::size_t>(a)] -= jac[i][static_cast<std::size_t>(a)] * r[i];
        for (int b = a; b < n_params; ++b)
          jtj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
              jac[i][static_cast<std::size_t>(a)] * jac[i][static_cast<std::size_t>(b)];
      }
    }
    for (int a = 0; a < n_params; ++a)
      for (int b = 0; b < a; ++b)
        jtj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
            jtj[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];

    bool stepped = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      std::vector<std::vector<double>> damped = jtj;
      for (int a = 0; a < n_params; ++a) {
        double& diag = damped[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)];
        diag += lambda * std::max(diag, 1e-12);
      }
      std::vector<double> step;
      if (solve_normal_equations(damped, jtr, step)) {
        std::vector<double> cand = p;
        for (int a = 0; a < n_params; ++a) cand[static_cast<std::size_t>(a)] += step[static_cast<std::size_t>(a)];
        prob.clamp(cand);
        const double cand_sse = prob.sse(cand);
        if (cand_sse <= sse) {
          double rel = 0.0;
          for (int a = 0; a < n_params; ++a)
            rel = std::max(rel, std::fabs(cand[static_cast<std::size_t>(a)] - p[static_cast<std::size_t>(a)]) /
                                    prob.scale(a, p));
          p = std::move(cand);
          sse = cand_sse;
          lambda = std::max(lambda / 3.0, 1e-12);
          stepped = true;
          converged = rel < kParamTolerance;
          break;
        }
      }
      lambda *= 4.0;
      if (lambda > 1e14) break;
    }
    if (!stepped && !converged) {
      // Damping exhausted without an accepted step: we are at a (possibly
      // flat) minimum to machine precision.
      converged = true;
    }
  }

  DipFit fit = pack_fit(prob, p);
  if (!converged) throw FitFailure("fit_dips: no convergence after 200 iterations", fit);
  if (n_dips == 2) {
    const double sep = std::fabs(fit.dips[0].center - fit.dips[1].center);
    const double w = std::min(fit.dips[0].fwhh, fit.dips[1].fwhh);
    if (sep < w / 10.0) throw IllPosedFit("fit_dips: dip centers degenerate");
  }
  return fit;
}

VisibilityPrediction predict_visibilities(double beta, double ea) {
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("predict_visibilities: beta in [0,1]");
  if (ea < 0.0 || ea > 1.0) throw std::invalid_argument("predict_visibilities: ea in [0,1]");
  VisibilityPrediction p;
  p.v3_overlapped = beta * (1.0 + 3.0 * ea) / (2.0 * (1.0 + ea));
  p.v3_dip1 = beta / 2.0;
  p.v3_dip2 = beta * ea / 2.0;
  return p;
}

double predict_visibility_mk(int n, int m) {
  if (n < 2) throw std::invalid_argument("predict_visibility_mk: n must be >= 2");
  if (m < 0 || m > n - 1) throw std::invalid_argument("predict_visibility_mk: m out of range");
  return static_cast<double>(m) / static_cast<double>(n - 1);
}

InferredEa infer_ea(double v3, double beta, EaInversion method) {
  if (v3 < 0.0 || v3 > 1.0 || beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("infer_ea: inputs must be in [0,1]");
  double raw = 0.0;
  if (method == EaInversion::v3) {
    if (v3 < beta / 2.0 - 1e-12 || v3 > beta + 1e-12)
      throw std::invalid_argument("infer_ea: v3 outside the invertible range [beta/2, beta]");
    raw = (2.0 * v3 - beta) / (3.0 * beta - 2.0 * v3);
  } else {
    if (beta <= 0.0) throw std::invalid_argument("infer_ea: beta must be positive for dip2");
    raw = 2.0 * v3 / beta;
  }
  InferredEa out;
  out.value = std::clamp(raw, 0.0, 1.0);
  out.clamped = out.value != raw;
  return out;
}

double infer_ea_wings(const ScanCurve& signal, const ScanCurve& accidental, int n_dips) {
  signal.validate();
  accidental.validate();
  if (signal.x.size() != accidental.x.size())
    throw std::invalid_argument("infer_ea_wings: curves must share the grid");
  for (std::size_t i = 0; i < signal.x.size(); ++i)
    if (std::fabs(signal.x[i] - accidental.x[i]) > 1e-9)
      throw std::invalid_argument("infer_ea_wings: curves must share the grid");

  const DipFit fit = fit_dips(signal, n_dips);
  double sum = 0.0;
  int wings = 0;
  for (std::size_t i = 0; i < signal.x.size(); ++i) {
    bool is_wing = true;
    for (const auto& d : fit.dips)
      is_wing &= std::fabs(signal.x[i] - d.center) > 2.0 * d.fwhh;
    if (!is_wing) continue;
    if (accidental.y[i] <= 0.0)
      throw std::invalid_argument("infer_ea_wings: accidental rate must be positive on wings");
    sum += signal.y[i] / accidental.y[i];
    ++wings;
  }
  if (wings < 5) throw InsufficientWings("infer_ea_wings: fewer than 5 wing points");
  return sum / wings - 1.0;
}

}  // namespace noonsim::analysis
