#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "credal/errors.hpp"

namespace credal {

// Counter-based splittable random stream. Each (seed, stream) pair indexes an
// independent sequence; the n-th draw is a pure function of (seed, stream, n),
// so results never depend on thread scheduling. split() derives child streams
// for per-repetition / per-bootstrap-round use.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  RngStream split(std::uint64_t child) const {
    return RngStream(seed_, mix(stream_ ^ mix(child ^ 0x9e3779b97f4a7c15ULL)));
  }

  std::uint64_t next_u64() {
    std::uint64_t x = counter_++;
    x = mix(x ^ mix(stream_ ^ mix(seed_ ^ 0xa0761d6478bd642fULL)));
    return x;
  }

  // Uniform on [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double next_double_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller; two uniforms per draw, no cached state.
  double next_normal() {
    double u1 = next_double_pos();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Marsaglia-Tsang for alpha >= 1, boosted for alpha < 1.
  double next_gamma(double alpha) {
    if (!(alpha > 0.0)) throw domain_error("next_gamma: alpha must be positive");
    if (alpha < 1.0) {
      double u = next_double_pos();
      return next_gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = next_double_pos();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

private:
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace credal
