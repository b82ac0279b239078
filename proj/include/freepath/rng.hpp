#pragma once

#include <cstdint>

namespace freepath {

// SplitMix64 finalizer (Stafford mix 13), bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// Counter-based word: a pure function of (key, stream, counter).  Draws are
// reproducible under any evaluation order or thread assignment.
constexpr std::uint64_t hash3(std::uint64_t key, std::uint64_t stream,
                              std::uint64_t counter) {
  std::uint64_t h = mix64(key + kGoldenGamma);
  h = mix64(h ^ (stream + kGoldenGamma));
  h = mix64(h ^ (counter + kGoldenGamma));
  return h;
}

// Top 53 bits give a uniform double in [0, 1).
constexpr double u01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Fixed (key, stream) with an advancing counter.
struct CounterStream {
  std::uint64_t key = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;

  double next_u01() { return u01(hash3(key, stream, counter++)); }
};

// Product-of-uniforms Poisson count.  O(lambda) draws; callers keep lambda
// small by choosing cells of width near 1/intensity.
inline std::uint64_t poisson_count(double exp_neg_lambda, CounterStream& rng) {
  std::uint64_t n = 0;
  double p = 1.0;
  for (;;) {
    p *= rng.next_u01();
    if (p <= exp_neg_lambda) return n;
    ++n;
  }
}

}  // namespace freepath
