#pragma once

#include <cstdint>
#include <random>

namespace nsdreg {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent per-replication streams
// from a single root seed so that worker count never affects results.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Rng make_stream(std::uint64_t root_seed, std::uint64_t stream_index) {
  return Rng(splitmix64(splitmix64(root_seed) + stream_index));
}

}  // namespace nsdreg
