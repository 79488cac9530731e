#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace hierops {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream for realization `index` of a run seeded with `master`.
///
/// Mixing: k = splitmix64(master ^ splitmix64(index ^ (purpose << 48)));
/// the engine is seeded through std::seed_seq with four successive
/// splitmix64 outputs starting from k. `purpose` separates streams that
/// share a realization index but must not share randomness (e.g. the two
/// arms of a comparison). Adding realizations never changes earlier ones.
inline Engine make_stream(std::uint64_t master, std::uint64_t index,
                          std::uint64_t purpose = 0) {
  std::uint64_t k = splitmix64(master ^ splitmix64(index ^ (purpose << 48)));
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < 4; ++i) {
    k = splitmix64(k);
    words[2 * i] = static_cast<std::uint32_t>(k);
    words[2 * i + 1] = static_cast<std::uint32_t>(k >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

inline double standard_normal(Engine& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace hierops
