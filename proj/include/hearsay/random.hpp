#pragma once

#include <cstdint>
#include <initializer_list>

namespace hearsay {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based draw: a pure function of the key, so the order in which
/// draws are requested never changes their values.
constexpr std::uint64_t keyed_draw(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
  std::uint64_t h = mix64(seed);
  for (auto k : key) h = mix64(h ^ k);
  return h;
}

/// Uniform double in [0, 1) from a 64-bit draw.
constexpr double unit_interval(std::uint64_t draw) { return static_cast<double>(draw >> 11) * 0x1.0p-53; }

}  // namespace hearsay
