#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qspa {

/// Deterministic random source. The raw mt19937_64 output sequence is fully
/// specified by the standard; the extractions below avoid the
/// implementation-defined std::*_distribution classes so that seeded runs
/// produce identical results on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double gaussian() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kTau * u2);
  }

 private:
  static constexpr double kTau = 6.283185307179586476925286766559;
  std::mt19937_64 engine_;
};

}  // namespace qspa
