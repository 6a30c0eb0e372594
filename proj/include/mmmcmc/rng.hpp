#pragma once

#include <cstdint>
#include <random>

namespace mmmcmc {

using RngEngine = std::mt19937_64;

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derives an independent seed from a base seed and up to three stream ids
/// (sampler index, replication index, scan index). Every replication owns its
/// stream, so results do not depend on thread scheduling. The exact chain of
/// SplitMix64 mixes below is part of the output contract and is documented in
/// the README.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(base);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

inline RngEngine make_engine(std::uint64_t seed) { return RngEngine(seed); }

}  // namespace mmmcmc
