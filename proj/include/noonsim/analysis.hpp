#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Dip fitting and the closed-form visibility relations. The dip model is a
// product of Gaussian dips on a flat baseline,
//   y = B * prod_d [1 - V_d exp(-4 ln2 (x - c_d)^2 / w_d^2)],
// so each dip keeps a well-defined visibility even when dips overlap.
namespace noonsim::analysis {

struct ScanCurve {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> yerr;  // empty = unweighted

  void validate() const;
};

struct DipFit {
  struct Dip {
    double depth = 0.0;
    double center = 0.0;
    double fwhh = 0.0;
    bool center_determined = true;
    double visibility(double baseline) const { return depth / baseline; }
  };
  double baseline = 0.0;
  std::vector<Dip> dips;  // sorted by center
  double residual_rms = 0.0;

  double visibility(std::size_t d) const { return dips[d].depth / baseline; }
};

class FitFailure : public std::runtime_error {
 public:
  FitFailure(const std::string& what, DipFit last) : std::runtime_error(what), last_iterate(std::move(last)) {}
  DipFit last_iterate;
};

class IllPosedFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientWings : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Damped least squares (numerically differenced Jacobian) on the dip model.
/// Weighted when yerr is present. Converges when the relative parameter
/// change drops below 1e-8; 200 iterations without convergence throw
/// FitFailure carrying the last iterate. Two dips whose fitted centers fall
/// within a tenth of a width throw IllPosedFit.
DipFit fit_dips(const ScanCurve& curve, int n_dips,
                const std::optional<std::vector<double>>& init_centers = std::nullopt);

/// The fitted model evaluated at x.
double dip_model(const DipFit& fit, double x);

struct VisibilityPrediction {
  double v3_overlapped = 0.0;  // both H photons co-modal with the V photon
  double v3_dip1 = 0.0;        // same-crystal dip, pair-overlap independent
  double v3_dip2 = 0.0;        // cross-crystal dip, scales with E/A
};

/// Closed forms: beta(1+3r)/(2(1+r)), beta/2, beta r/2 with r = E/A.
VisibilityPrediction predict_visibilities(double beta, double ea);

/// Visibility m/(n-1) when m H photons share the V photon's temporal mode.
double predict_visibility_mk(int n, int m);

struct InferredEa {
  double value = 0.0;
  bool clamped = false;
};

enum class EaInversion { v3, dip2 };

/// Inverts the overlapped-visibility relation (v3) or the second-dip
/// relation (dip2) for E/A. The v3 inversion requires beta/2 <= v3 <= beta;
/// results are clamped to [0,1] with the clamp reported.
InferredEa infer_ea(double v3, double beta, EaInversion method);

/// Wings-ratio estimate: fits the signal dips, keeps points farther than
/// twice the fitted width from every center, and returns
/// mean(signal/accidental) - 1 over those wings.
double infer_ea_wings(const ScanCurve& signal, const ScanCurve& accidental, int n_dips = 1);

}  // namespace noonsim::analysis
