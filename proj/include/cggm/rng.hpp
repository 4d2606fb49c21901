#pragma once

#include <cstdint>
#include <cmath>

#include "cggm/mvn.hpp"

namespace cggm {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic combiner for deriving stream seeds (chain index, graph key
// hash, block index) from a master seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (0x9E3779B97F4A7C15ull + (b << 6) + (b >> 2));
  std::uint64_t x = splitmix64(s);
  return x ^ splitmix64(s);
}

inline std::uint64_t hash_bytes(const unsigned char* data, std::size_t len) {
  std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

// xoshiro256++ with splitmix64 seeding. The standard library distributions
// are not portable across implementations, so all variate generation is done
// here; a run is then reproducible from its seeds on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (auto& w : s_) w = splitmix64(seed);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return std_normal_quantile(uniform()); }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  // Marsaglia-Tsang; shape > 0, scale > 0.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double xx = x * x;
      if (u < 1.0 - 0.0331 * xx * xx) return d * v * scale;  // squeeze
      if (std::log(u) < 0.5 * xx + d - d * v + d * std::log(v)) {
        return d * v * scale;
      }
    }
  }

  // chi(nu) as the square root of a gamma(nu/2, 2) draw.
  double chi(double nu) { return std::sqrt(gamma(0.5 * nu, 2.0)); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace cggm
