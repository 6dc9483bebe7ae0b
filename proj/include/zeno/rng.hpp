#pragma once
// Counter-based uniform variates: the value for (seed, stream, counter) is a
// pure function of its arguments, so trajectories can be sampled in any order
// or on any thread and still reproduce bit-for-bit.

#include <cstdint>

namespace zeno {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform double in [0, 1) with 53 random bits.
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t h = splitmix64(splitmix64(seed ^ splitmix64(stream)) + counter);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace zeno
