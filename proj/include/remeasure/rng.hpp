#pragma once

#include <cstdint>
#include <random>

namespace remeasure {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective mix of a 64-bit word.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the independent stream addressed by (seed, index, sub). Streams for
/// different addresses are decorrelated, and the value does not depend on the
/// order in which streams are requested.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t sub = 0);

inline Rng make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t sub = 0) {
  return Rng(stream_seed(seed, index, sub));
}

}  // namespace remeasure
