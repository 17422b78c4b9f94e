#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dmimo {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent streams from a master seed.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Stream seed = mix(mix(master ^ tag) + index). Adding a new index or tag never
// changes the seeds of existing ones.
constexpr std::uint64_t split_seed(std::uint64_t master, std::string_view tag,
                                   std::uint64_t index = 0) {
  return mix64(mix64(master ^ hash_tag(tag)) + index);
}

inline Rng make_rng(std::uint64_t master, std::string_view tag, std::uint64_t index = 0) {
  return Rng(split_seed(master, tag, index));
}

}  // namespace dmimo
