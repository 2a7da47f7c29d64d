#pragma once

#include <cstdint>

// Seeded, stream-splittable random numbers. Every consumer derives its own
// stream from a master seed and a couple of key integers, so parallel and
// serial evaluation orders produce bit-identical results.
namespace noonsim::rng {

/// Advances the splitmix64 state and returns the next 64-bit value.
std::uint64_t splitmix64(std::uint64_t& state);

/// Mixes a master seed with up to two stream keys into an independent seed.
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Inverse CDF of the standard normal distribution (Wichura AS 241,
/// double-precision branch). |error| < 1e-15 over (1e-300, 1-1e-16).
double normal_icdf(double p);

class Stream {
 public:
  explicit Stream(std::uint64_t key) : state_(key) {}

  /// Uniform deviate in the open interval (0, 1).
  double u01();

  /// Standard normal deviate via inverse-CDF sampling.
  double normal() { return normal_icdf(u01()); }

  std::uint64_t next_u64() { return splitmix64(state_); }

 private:
  std::uint64_t state_;
};

/// Poisson deviate. Exact for any mean (large means are split into
/// sub-30 chunks so the multiplicative method never underflows).
std::uint64_t poisson(Stream& stream, double mean);

}  // namespace noonsim::rng
