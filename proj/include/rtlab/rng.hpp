#pragma once

#include <cstdint>
#include <random>

namespace rtlab {

using Rng = std::mt19937_64;

/// Independent seed streams used by ensembles.
enum class SeedStream : std::uint64_t {
  Kinetic = 0x6b696e65746963ULL,
  Limit = 0x6c696d6974ULL,
  Martingale = 0x6d617274ULL,
};

/// Deterministic (base seed, sample index, stream) -> seed map (SplitMix64
/// finalizer applied to the mixed inputs). Order-independent: the seed of a
/// sample never depends on which thread runs it.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, SeedStream stream);

}  // namespace rtlab
