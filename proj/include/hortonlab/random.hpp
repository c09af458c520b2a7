#pragma once

#include <cstdint>
#include <random>

namespace hortonlab {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Seed of trajectory `index` under master seed `seed`:
//   splitmix64(splitmix64(seed) + (index + 1) * 0x9E3779B97F4A7C15)
// Streams depend only on (seed, index), never on worker assignment.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

inline Rng make_stream(std::uint64_t seed, std::uint64_t index) { return Rng(stream_seed(seed, index)); }

}  // namespace hortonlab
