#pragma once

#include <cmath>
#include <cstdint>

namespace calib {

namespace detail {

// splitmix64 finalizer; used for seeding and substream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256++ with explicit seeding. The whole toolkit draws randomness
// through this class so that results are reproducible from a single seed
// on any platform; the standard library distributions are avoided on
// purpose (their output is implementation-defined).
//
// Substreams: `substream(i)` derives an independent generator from the
// master seed and the index, so parallel or reordered consumers still
// produce identical results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = detail::splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. Two uniforms per draw, no cached
  // spare, so the consumed stream length per call is fixed.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform index in [0, n); n must be positive. Unbiased via rejection.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t threshold = (0ULL - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  std::uint64_t seed() const { return seed_; }

  // Deterministic substream derivation: mix (seed, index+1) through
  // splitmix64 and reseed.
  Rng substream(std::uint64_t index) const {
    std::uint64_t s = seed_ ^ (0xA0761D6478BD642FULL * (index + 1));
    const std::uint64_t derived = detail::splitmix64(s);
    return Rng(derived);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_[4];
};

}  // namespace calib
