// Stateless counter-based random bits: every draw is a pure function of its key.
#pragma once

#include <cstdint>
#include <string_view>

namespace arw {

/// Recorded in every output file so a run can be replayed bit for bit.
inline constexpr std::string_view kGeneratorId = "splitmix64-counter/v1";

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a + kGoldenGamma) ^ (b + 0x632be59bd9b4e019ULL));
}

/// Element `k` of the SplitMix64 sequence started at `base`.
constexpr std::uint64_t counter_draw(std::uint64_t base, std::uint64_t k) {
  return mix64(base + k * kGoldenGamma);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace arw
