#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "avseg/errors.hpp"

namespace avseg {

// splitmix64 step, used for seed expansion and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic child seed for an independent stream (per lecture, per epoch, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0xa0761d6478bd642fULL * (stream + 1));
  return splitmix64(s);
}

// xoshiro256** 1.0 (Blackman & Vigna), seeded via splitmix64. Chosen over
// std:: engines because the algorithm is pinned: the same seed reproduces
// the same stream on every platform and in reimplementations elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t uniform_int(std::uint64_t n) {
    require_valid(n > 0, "uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; the spare value is cached so one draw
  // consumes exactly two uniforms for every pair of outputs.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Gamma(shape, 1) for shape >= 1, Marsaglia-Tsang squeeze method.
  double gamma(double shape) {
    require_valid(shape >= 1.0, "gamma: shape must be >= 1");
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = gaussian();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = 1.0 - uniform();  // (0, 1], keeps log finite
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  // Symmetric Dirichlet(concentration) over `n` components.
  std::vector<double> dirichlet(std::size_t n, double concentration) {
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& wi : w) {
      wi = gamma(concentration);
      total += wi;
    }
    for (auto& wi : w) wi /= total;
    return w;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4]{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace avseg
