#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace brdfnqm {

// Stateless mixing used to derive independent RNG streams from a user seed
// and a stable key (bin index, pair id). Streams never depend on scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t key) {
  return splitmix64(splitmix64(seed) ^ splitmix64(key + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view key) { return stream_seed(seed, fnv1a(key)); }

using Rng = std::mt19937_64;

// Counter-based draws: value depends only on (seed, key), so per-bin or
// per-sample noise can be generated in any order.
inline double counter_uniform(std::uint64_t seed, std::uint64_t key) {
  // 53 random bits mapped into (0, 1).
  return (static_cast<double>(stream_seed(seed, key) >> 11) + 0.5) * 0x1.0p-53;
}

inline double counter_normal(std::uint64_t seed, std::uint64_t key) {
  const double u1 = counter_uniform(seed, 2 * key);
  const double u2 = counter_uniform(seed, 2 * key + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
}

}  // namespace brdfnqm
