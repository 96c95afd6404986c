#pragma once

#include <cstdint>
#include <string_view>

namespace awats {

// SplitMix64 finaliser.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stable sub-seed for a named purpose; independent of platform and of the
// order in which sub-seeds are requested.
constexpr uint64_t derive_seed(uint64_t seed, std::string_view purpose) {
  uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a offset basis
  for (char c : purpose) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return mix64(seed ^ mix64(h));
}

constexpr uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b) {
  return mix64(mix64(seed ^ mix64(a)) ^ mix64(b + 0x632BE59BD9B4E019ULL));
}

}  // namespace awats
