#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gdvalign/graph.h"

namespace gdvalign {

// Automorphism orbits of the nine 2-4 node graphlets, standard numbering:
//   0      edge
//   1, 2   3-path (end, middle)
//   3      triangle
//   4, 5   4-path (end, middle)
//   6, 7   claw (leaf, center)
//   8      4-cycle
//   9-11   paw (tail, triangle degree-2 node, degree-3 node)
//   12, 13 diamond (degree-2 node, degree-3 node)
//   14     4-clique
inline constexpr std::size_t kNumOrbits = 15;

using Gdv = std::array<std::uint64_t, kNumOrbits>;
using GdvMatrix = std::vector<Gdv>;

// Exact per-node orbit counts. 4-node orbits are solved from a linear system
// over 3-node and triangle statistics plus an explicit 4-clique count.
// threads > 1 splits nodes across workers.
GdvMatrix count_orbits(const Graph &g, unsigned threads = 1);

// Testing oracle: enumerates every 2/3/4-node subset, matches the induced
// subgraph against the canonical graphlets by permutation, and tallies the
// orbit of each member. O(n^4).
GdvMatrix brute_force_orbits(const Graph &g);

struct LabeledGdv {
  std::vector<std::string> labels;
  GdvMatrix gdv;
};

// "label c0 ... c14" per line, nodes in id order.
void write_gdv(const Graph &g, const GdvMatrix &gdv, std::ostream &out);
LabeledGdv read_gdv(std::istream &in);
LabeledGdv read_gdv(std::string_view text);

}  // namespace gdvalign
