#pragma once

#include <cstdint>

namespace aslap {

// splitmix64 finalizer; used to derive independent stream seeds so that
// per-cell and per-trial randomness does not depend on evaluation order.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
  return mix_seed(mix_seed(mix_seed(base) ^ stream) ^ index);
}

// Stream tags.
inline constexpr std::uint64_t kSensorNoiseStream = 0x5e45;
inline constexpr std::uint64_t kTieBreakStream = 0x7eb4;
inline constexpr std::uint64_t kLatentSampleStream = 0x1a7e;
inline constexpr std::uint64_t kStartStream = 0x57a7;

}  // namespace aslap
