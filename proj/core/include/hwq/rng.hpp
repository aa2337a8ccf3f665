#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace hwq {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic, independent engine for the stream addressed by `path`
/// under `seed`, e.g. make_rng(seed, {replication, stream_index}).
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  std::uint64_t h = mix64(seed);
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  for (std::uint64_t p : path) {
    h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    words.push_back(static_cast<std::uint32_t>(h));
    words.push_back(static_cast<std::uint32_t>(h >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

/// Uniform draw on the open-closed interval (0, 1].
inline double uniform_pos(Rng& rng) {
  return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

}  // namespace hwq
