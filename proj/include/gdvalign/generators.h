#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "gdvalign/graph.h"

namespace gdvalign {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; the building block for all seed derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed for one benchmark cell. Fields are folded in order
// (master, fnv1a(network), noise_pct, instance) through mix64, so every
// record is reproducible from the master seed and the cell identity alone.
std::uint64_t derive_seed(std::uint64_t master, std::string_view network,
                          int noise_pct, int instance) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::string_view network) noexcept;

// Geometric random graph: n uniform points in the 3D unit cube, edges are the
// m closest pairs (ties broken by pair order). Exactly m edges.
Graph generate_geo(std::size_t n, std::size_t m, std::uint64_t seed);

// Preferential attachment with k = round(m/n) links per new node from a
// k-node seed clique, then uniform edge additions/removals to hit m exactly.
Graph generate_sf(std::size_t n, std::size_t m, std::uint64_t seed);

enum class RewireMode {
  kRemoveAdd,         // remove uniform edges, add uniform non-edges
  kDegreePreserving,  // double-edge swaps
};

struct NoisePair {
  Graph original;
  Graph noisy;
  int noise_pct = 0;
  std::uint64_t seed = 0;
  // Identity on node ids; kept explicit for evaluation code.
  std::vector<NodeId> true_mapping;
};

// Rewires ceil(noise_pct/100 * |E|) edges. Node set and |E| are preserved.
NoisePair rewire(const Graph &g, int noise_pct, std::uint64_t seed,
                 RewireMode mode = RewireMode::kRemoveAdd);

}  // namespace gdvalign
