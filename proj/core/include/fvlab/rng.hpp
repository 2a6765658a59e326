#pragma once

#include <cmath>
#include <cstdint>

namespace fvlab {

// Counter-seeded xoshiro256++ stream. A (seed, stream_id) pair fully
// determines the draw sequence, so replicas with distinct stream ids are
// independent and any run is reproducible bit-for-bit. All distribution
// transforms are implemented here rather than through <random> so the
// sequence does not depend on the standard library in use.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    // splitmix64 expansion of (seed, stream_id) into the 256-bit state.
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
    for (auto& word : state_) word = splitmix64(x);
    // Avoid the all-zero state (splitmix cannot produce it from all inputs,
    // but the xor fold above could in principle).
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on (0,1): 53-bit mantissa, never exactly 0 or 1.
  double uniform01() {
    const std::uint64_t bits = next_u64() >> 11;
    double u = static_cast<double>(bits) * 0x1.0p-53;
    if (u == 0.0) u = 0x1.0p-53;
    return u;
  }

  // Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Exp(1) via inversion.
  double exponential() { return -std::log(uniform01()); }

  // Standard normal, Marsaglia polar method. Stateless across calls: the
  // spare deviate is cached, which keeps sequences deterministic.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection against the largest multiple of n to stay unbiased.
    const std::uint64_t limit = n * (~0ULL / n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fvlab
