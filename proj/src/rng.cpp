#include "rtlab/rng.hpp"

namespace rtlab {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, SeedStream stream) {
  return splitmix64(splitmix64(base ^ static_cast<std::uint64_t>(stream)) + index);
}

}  // namespace rtlab
