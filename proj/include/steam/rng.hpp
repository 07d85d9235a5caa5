#pragma once

#include <cstdint>
#include <random>

namespace steam {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! Seed of the independent child stream `stream` of a parent seed. Replicates,
//! folds and perturbation draws each get their own stream so results do not
//! depend on scheduling.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream)
{
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng child_rng(std::uint64_t seed, std::uint64_t stream)
{
  return Rng(child_seed(seed, stream));
}

} // namespace steam
