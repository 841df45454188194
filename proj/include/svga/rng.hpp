// Splittable PRNG with bit-stable output across platforms and standard
// libraries. One generator per purpose (init / dropout / sampling / folds /
// splits) so toggling one feature never shifts the draws of another.
#pragma once

#include "svga/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace svga {

enum class RngStream : std::uint64_t {
  init = 1,
  dropout = 2,
  sampling = 3,
  folds = 4,
  splits = 5,
  bench = 6,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace detail

// xoshiro256++, seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = detail::splitmix64(sm);
    has_gauss_ = false;
  }

  // Derive an independent stream for a purpose; `salt` distinguishes
  // repeated uses (fold index, grid config index, ...).
  static Rng stream(std::uint64_t seed, RngStream purpose, std::uint64_t salt = 0) {
    std::uint64_t sm = seed;
    std::uint64_t a = detail::splitmix64(sm);
    sm = a ^ (static_cast<std::uint64_t>(purpose) * 0x9e3779b97f4a7c15ULL);
    std::uint64_t b = detail::splitmix64(sm);
    sm = b ^ (salt + 0x632be59bd9b4e019ULL);
    return Rng(detail::splitmix64(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection to kill modulo bias.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; caches the second value.
  double normal() {
    if (has_gauss_) {
      has_gauss_ = false;
      return gauss_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    gauss_ = r * std::sin(theta);
    has_gauss_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::uint64_t state_[4];
  double gauss_ = 0.0;
  bool has_gauss_;
};

}  // namespace svga
