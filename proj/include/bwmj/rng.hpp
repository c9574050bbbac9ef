#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bwmj {

// All randomness in a run flows through this engine; mt19937_64 output is
// fully specified by the standard, so streams are identical across platforms.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Order-sensitive combination of hashed fields.
constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) noexcept {
  return splitmix64(seed ^ splitmix64(v + 0x632be59bd9b4e019ULL));
}

// Uniform double in [0, 1) from the top 53 bits. std::uniform_real_distribution
// is implementation-defined, which would break cross-toolchain replay.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Independent stream for a named purpose (e.g. "environment") under one seed.
inline Rng derive_stream(std::uint64_t seed, std::string_view purpose) {
  return Rng{hash_combine(seed, fnv1a64(purpose))};
}

}  // namespace bwmj
