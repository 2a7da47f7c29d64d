#include "noonsim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace noonsim::rng {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = seed;
  std::uint64_t k = splitmix64(s);
  s ^= a * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  k ^= splitmix64(s);
  s ^= b * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL;
  k ^= splitmix64(s);
  return k;
}

double Stream::u01() {
  // 53-bit mantissa, shifted away from 0 so logs/icdf never see an endpoint.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

namespace {

// Coefficients from Wichura's algorithm AS 241 (PPND16).
double icdf_central(double r) {
  static const double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2,  1.9715909503065514427e3,
      1.3731693765509461125e4,  4.5921953931549871457e4,  6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static const double b[8] = {
      1.0,                      4.2313330701600911252e1,  6.8718700749205790830e2,
      5.3941960214247511077e3,  2.1213794301586595867e4,  3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  double num = a[7], den = b[7];
  for (int i = 6; i >= 0; --i) {
    num = num * r + a[i];
    den = den * r + b[i];
  }
  return num / den;
}

double icdf_tail(double r, bool far_tail) {
  static const double c[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double d[8] = {
      1.0,                      2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static const double e[8] = {
      6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double f[8] = {
      1.0,                      5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};
  const double* p = far_tail ? e : c;
  const double* q = far_tail ? f : d;
  double num = p[7], den = q[7];
  for (int i = 6; i >= 0; --i) {
    num = num * r + p[i];
    den = den * r + q[i];
  }
  return num / den;
}

}  // namespace

double normal_icdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_icdf: p must be in (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * icdf_central(r);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double v;
  if (r <= 5.0) {
    v = icdf_tail(r - 1.6, false);
  } else {
    v = icdf_tail(r - 5.0, true);
  }
  return (q < 0.0) ? -v : v;
}

std::uint64_t poisson(Stream& stream, double mean) {
  if (mean < 0.0) throw std::invalid_argument("poisson: mean must be nonnegative");
  std::uint64_t total = 0;
  // Split large means so exp(-mean) stays representable.
  while (mean > 30.0) {
    double half = mean / 2.0;
    std::uint64_t k = 0;
    const double limit = std::exp(-half);
    double prod = stream.u01();
    while (prod > limit) {
      ++k;
      prod *= stream.u01();
    }
    total += k;
    mean -= half;
  }
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double prod = stream.u01();
  while (prod > limit) {
    ++k;
    prod *= stream.u01();
  }
  return total + k;
}

}  // namespace noonsim::rng
