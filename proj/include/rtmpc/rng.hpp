// Portable deterministic PRNG: SplitMix64 (Steele, Lea, Vigna). Pure 64-bit
// integer arithmetic, identical sequences on every platform. Never the
// platform default engine. Stream derivation for sweeps hashes the master
// seed with the run coordinates.

#pragma once

#include <cstdint>

namespace rtmpc {

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform double in [0, 1), 53 mantissa bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p_true) { return uniform() < p_true; }

 private:
  uint64_t state_;
};

// Stream derivation: mix words through the SplitMix64 output function so that
// (master, a, b, c) tuples give independent streams.
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0,
                            uint64_t c = 0) {
  SplitMix64 h(master ^ 0x6a09e667f3bcc909ULL);
  uint64_t s = h.next();
  s ^= a + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
  s = SplitMix64(s).next();
  s ^= b + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
  s = SplitMix64(s).next();
  s ^= c + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
  return SplitMix64(s).next();
}

}  // namespace rtmpc
