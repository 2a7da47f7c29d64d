#include <doctest.h>

#include <cmath>
#include <random>

#include "noonsim/analysis.hpp"

using namespace noonsim::analysis;

namespace {

constexpr double kFourLn2 = 4.0 * 0.6931471805599453;

struct DipSpec {
  double v, c, w;
};

// Synthetic data straight from the model definition (kept local so the test
// does not depend on the implementation's own evaluator).
ScanCurve synthesize(double baseline, const std::vector<DipSpec>& dips, double x_lo, double x_hi,
                     int points, double noise_frac = 0.0, std::uint64_t seed = 0) {
  ScanCurve curve;
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  for (int i = 0; i < points; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / (points - 1.0);
    double y = baseline;
    for (const auto& d : dips) {
      const double u = (x - d.c) / d.w;
      y *= 1.0 - d.v * std::exp(-kFourLn2 * u * u);
    }
    if (noise_frac > 0.0) y *= 1.0 + noise_frac * normal(gen);
    curve.x.push_back(x);
    curve.y.push_back(y);
  }
  return curve;
}

}  // namespace

TEST_CASE("curve validation") {
  ScanCurve bad;
  bad.x = {0.0, 1.0, 1.0};
  bad.y = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.x = {0.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("noiseless single dip is recovered to 1e-6") {
  const ScanCurve curve = synthesize(2.5, {{0.91, 12.0, 185.0}}, -500.0, 500.0, 41);
  const DipFit fit = fit_dips(curve, 1);
  CHECK(fit.baseline == doctest::Approx(2.5).epsilon(1e-6));
  CHECK(fit.visibility(0) == doctest::Approx(0.91).epsilon(1e-6));
  CHECK(fit.dips.front().center == doctest::Approx(12.0).epsilon(1e-4));
  CHECK(fit.dips.front().fwhh == doctest::Approx(185.0).epsilon(1e-6));
  CHECK(fit.residual_rms < 1e-8);
  CHECK(fit.dips.front().center_determined);
}

TEST_CASE("noisy double dip recovered within 0.02 over seeds") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const ScanCurve curve =
        synthesize(1.0, {{0.45, 0.0, 200.0}, {0.39, 600.0, 200.0}}, -400.0, 1000.0, 57, 0.03, seed);
    const DipFit fit = fit_dips(curve, 2);
    CAPTURE(seed);
    CHECK(std::fabs(fit.visibility(0) - 0.45) < 0.02);
    CHECK(std::fabs(fit.visibility(1) - 0.39) < 0.02);
    CHECK(std::fabs(fit.dips[0].center - 0.0) < 20.0);
    CHECK(std::fabs(fit.dips[1].center - 600.0) < 20.0);
  }
}

TEST_CASE("flat curve yields a zero dip with an undetermined center") {
  ScanCurve curve;
  for (int i = 0; i < 48; ++i) {
    curve.x.push_back(i * 10.0);
    curve.y.push_back(3.0);
  }
  const DipFit fit = fit_dips(curve, 1);
  CHECK(fit.visibility(0) < 1e-6);
  CHECK_FALSE(fit.dips.front().center_determined);
}

TEST_CASE("fit round-trip property over random dip parameters") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> vis(0.05, 1.0);
  std::uniform_real_distribution<double> width(50.0, 500.0);
  std::uniform_real_distribution<double> center(-150.0, 150.0);
  std::uniform_real_distribution<double> base(0.5, 50.0);
  for (int trial = 0; trial < 40; ++trial) {
    const DipSpec d{vis(gen), center(gen), width(gen)};
    const double b = base(gen);
    const ScanCurve curve = synthesize(b, {d}, -900.0, 900.0, 61);
    const DipFit fit = fit_dips(curve, 1);
    CAPTURE(trial);
    CHECK(std::fabs(fit.baseline - b) / b < 1e-5);
    CHECK(std::fabs(fit.visibility(0) - d.v) / d.v < 1e-5);
    CHECK(std::fabs(fit.dips.front().fwhh - d.w) / d.w < 1e-5);
  }
}

TEST_CASE("scale invariance of fitted visibilities") {
  const ScanCurve curve = synthesize(1.0, {{0.6, 0.0, 150.0}}, -500.0, 500.0, 41);
  ScanCurve scaled = curve;
  for (double& y : scaled.y) y *= 7.3e4;
  const DipFit a = fit_dips(curve, 1);
  const DipFit b = fit_dips(scaled, 1);
  CHECK(std::fabs(a.visibility(0) - b.visibility(0)) < 1e-10);
  CHECK(std::fabs(a.dips.front().fwhh - b.dips.front().fwhh) / a.dips.front().fwhh < 1e-8);
}

TEST_CASE("fit preconditions and degenerate cases") {
  const ScanCurve tiny = synthesize(1.0, {{0.5, 0.0, 100.0}}, -200.0, 200.0, 20);
  CHECK_THROWS_AS(fit_dips(tiny, 1), std::invalid_argument);  // < 8 points/param
  const ScanCurve ok = synthesize(1.0, {{0.5, 0.0, 100.0}}, -200.0, 200.0, 60);
  CHECK_THROWS_AS(fit_dips(ok, 3), std::invalid_argument);

  // Two dips forced onto the same center collapse to a degenerate fit.
  const ScanCurve single = synthesize(1.0, {{0.7, 0.0, 100.0}}, -400.0, 400.0, 80);
  CHECK_THROWS_AS(fit_dips(single, 2, std::vector<double>{-2.0, 2.0}), IllPosedFit);
}

TEST_CASE("weighted fit uses the error column") {
  ScanCurve curve = synthesize(1.0, {{0.5, 0.0, 150.0}}, -500.0, 500.0, 41);
  // Corrupt one point but give it a huge error bar; the weighted fit should
  // shrug it off.
  ScanCurve weighted = curve;
  weighted.yerr.assign(curve.x.size(), 0.01);
  weighted.y[20] *= 1.5;
  weighted.yerr[20] = 1e6;
  const DipFit fit = fit_dips(weighted, 1);
  CHECK(fit.visibility(0) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("closed-form visibility predictions") {
  const auto p1 = predict_visibilities(0.96, 0.82);
  CHECK(p1.v3_overlapped == doctest::Approx(0.9125).epsilon(5e-4));
  const auto p2 = predict_visibilities(0.92, 0.86);
  CHECK(p2.v3_dip1 == doctest::Approx(0.46).epsilon(1e-12));
  CHECK(p2.v3_dip2 == doctest::Approx(0.3956).epsilon(1e-12));
  const auto ideal = predict_visibilities(1.0, 1.0);
  CHECK(ideal.v3_overlapped == doctest::Approx(1.0));
  CHECK(ideal.v3_dip1 == doctest::Approx(0.5));
  CHECK(ideal.v3_dip2 == doctest::Approx(0.5));
  CHECK(p2.v3_dip2 <= p2.v3_dip1);
  CHECK_THROWS_AS(predict_visibilities(1.2, 0.5), std::invalid_argument);
}

TEST_CASE("m/(n-1) rule values") {
  CHECK(predict_visibility_mk(3, 1) == doctest::Approx(0.5));
  CHECK(predict_visibility_mk(3, 2) == doctest::Approx(1.0));
  CHECK(predict_visibility_mk(5, 0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(predict_visibility_mk(3, 3), std::invalid_argument);
  CHECK_THROWS_AS(predict_visibility_mk(1, 0), std::invalid_argument);
}

TEST_CASE("E/A inversions") {
  CHECK(infer_ea(0.9125, 0.96, EaInversion::v3).value == doctest::Approx(0.82).epsilon(1e-3));
  CHECK(infer_ea(0.3956, 0.92, EaInversion::dip2).value == doctest::Approx(0.86).epsilon(1e-12));
  CHECK(infer_ea(0.48, 0.96, EaInversion::v3).value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(infer_ea(0.3, 0.96, EaInversion::v3), std::invalid_argument);
  const auto clamped = infer_ea(0.6, 0.92, EaInversion::dip2);
  CHECK(clamped.clamped);
  CHECK(clamped.value == doctest::Approx(1.0));
}

TEST_CASE("inversion consistency across the (beta, ea) grid") {
  for (double beta = 0.5; beta <= 1.0; beta += 0.1) {
    for (double ea = 0.0; ea <= 1.0; ea += 0.125) {
      const auto p = predict_visibilities(beta, ea);
      const auto back = infer_ea(p.v3_overlapped, beta, EaInversion::v3);
      CHECK(std::fabs(back.value - ea) < 1e-10);
      const auto back2 = infer_ea(p.v3_dip2, beta, EaInversion::dip2);
      CHECK(std::fabs(back2.value - ea) < 1e-10);
    }
  }
}

TEST_CASE("wings inference") {
  // Signal = (1 + e) * accidental away from a dip at the center.
  const double ea = 0.63;
  ScanCurve accidental = synthesize(1.0, {{0.48, 0.0, 100.0}}, -600.0, 600.0, 49);
  ScanCurve signal = synthesize(1.0 + ea, {{0.9, 0.0, 110.0}}, -600.0, 600.0, 49);
  CHECK(infer_ea_wings(signal, accidental) == doctest::Approx(ea).epsilon(1e-6));

  // Identical curves -> 0; doubled signal -> 1.
  CHECK(infer_ea_wings(accidental, accidental) == doctest::Approx(0.0).epsilon(1e-9));
  ScanCurve doubled = accidental;
  for (double& y : doubled.y) y *= 2.0;
  CHECK(infer_ea_wings(doubled, accidental) == doctest::Approx(1.0).epsilon(1e-9));

  // Narrow grid leaves no wings.
  ScanCurve core = synthesize(1.0, {{0.5, 0.0, 400.0}}, -500.0, 500.0, 41);
  CHECK_THROWS_AS(infer_ea_wings(core, core), InsufficientWings);

  ScanCurve offgrid = accidental;
  for (double& x : offgrid.x) x += 0.5;
  CHECK_THROWS_AS(infer_ea_wings(signal, offgrid), std::invalid_argument);
}
