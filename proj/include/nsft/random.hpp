#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic random helpers.
//
// The standard <random> distributions are implementation-defined, so the same
// seed can produce different streams on different standard libraries. All
// randomness in this project therefore goes through mt19937_64 (whose output
// sequence is fully specified by the standard) plus the hand-rolled mappings
// below, giving byte-identical results across platforms.

namespace nsft::rng {

using engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a stream tag
// (e.g. shuffle seed + epoch number).
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

inline engine make_engine(std::uint64_t seed) { return engine(seed); }

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(engine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform double in [low, high]; degenerates to exactly `low` when low == high.
inline double uniform(engine& g, double low, double high) {
  return low + uniform01(g) * (high - low);
}

// Standard normal via Box-Muller (cosine branch only, two draws per sample).
inline double gaussian(engine& g) {
  const double u1 = static_cast<double>((g() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

// Unbiased integer in [0, n) by rejection (Lemire). n must be >= 1.
inline std::uint64_t bounded(engine& g, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = g();
    const auto m = static_cast<unsigned __int128>(x) * n;
    if (static_cast<std::uint64_t>(m) >= threshold)
      return static_cast<std::uint64_t>(m >> 64);
  }
}

// Fisher-Yates with the bounded draw above; std::shuffle is not portable.
template <class T>
void shuffle(std::vector<T>& v, engine& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace nsft::rng
