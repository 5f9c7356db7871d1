#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sppq {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed-splitting rule: child = mix64(parent ^ fnv1a(label)). Every stage of a
/// run derives its seed from the master seed and a fixed label, so a stage can
/// be rerun alone and reproduce the same stream.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) noexcept {
  return mix64(parent ^ fnv1a(label));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(parent ^ mix64(index + 0x5851F42D4C957F2DULL));
}

}  // namespace sppq
