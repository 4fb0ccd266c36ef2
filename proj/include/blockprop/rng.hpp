#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace blockprop {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; mixes a base seed with stream identifiers so that
/// (seed, run, fold, tree) tuples get independent generators.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> streams) {
  std::uint64_t s = mix_seed(seed);
  for (auto v : streams) s = mix_seed(s ^ (v + 0x632BE59BD9B4E019ULL));
  return s;
}

}  // namespace blockprop
