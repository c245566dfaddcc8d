#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "toklab/errors.hpp"

namespace toklab {

// mt19937_64 output is bit-exact across platforms by the standard, but the
// standard distributions are not. Everything that must reproduce byte-for-byte
// (splits, epoch shuffles, segmentation sampling) goes through these helpers.

inline std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw ContractError("bounded_uniform: empty range");
  // rejection sampling; threshold = 2^64 mod n
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

template <typename T>
void shuffle_deterministic(std::vector<T>& v, std::mt19937_64& rng) {
  if (v.size() < 2) return;
  for (std::size_t i = v.size() - 1; i > 0; --i) {
    const std::uint64_t j = bounded_uniform(rng, static_cast<std::uint64_t>(i) + 1);
    using std::swap;
    swap(v[i], v[static_cast<std::size_t>(j)]);
  }
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace toklab
