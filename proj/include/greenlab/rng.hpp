#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace greenlab {

/// Counter-based splittable RNG: stream(seed, index) gives an independent,
/// reproducible generator per sample/trial regardless of evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {}
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    Rng r(seed);
    r.state_ += 0xbf58476d1ce4e5b9ULL * (index + 1);
    r.next();
    r.next();
    return r;
  }

  std::uint64_t next() {  // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    // Box-Muller; consumes two uniforms.
    double u1 = uniform(), u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Standard complex Gaussian (E|z|^2 = 1).
  std::complex<double> cgaussian() {
    double u1 = uniform(), u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double r = std::sqrt(-std::log(u1));
    return std::polar(r, 2.0 * M_PI * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace greenlab
