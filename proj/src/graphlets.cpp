#include "gdvalign/graphlets.h"

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "adjacency.h"
#include "gdvalign/errors.h"

namespace gdvalign {

namespace {

using Count = std::int64_t;

using detail::AdjacencyTest;

// Per-arc triangle counts: tri[a] for arc u->v is |N(u) ∩ N(v)|.
struct ArcData {
  std::vector<std::size_t> base;  // first arc index of each node
  std::vector<Count> tri;
};

ArcData arc_triangles(const Graph &g) {
  const std::size_t n = g.num_nodes();
  ArcData d;
  d.base.resize(n + 1, 0);
  for (NodeId u = 0; u < n; ++u) d.base[u + 1] = d.base[u] + g.degree(u);
  d.tri.assign(d.base[n], 0);
  for (NodeId u = 0; u < n; ++u) {
    auto nu = g.neighbors(u);
    for (std::size_t i = 0; i < nu.size(); ++i) {
      NodeId v = nu[i];
      if (v < u) continue;
      auto nv = g.neighbors(v);
      Count common = 0;
      auto a = nu.begin(), b = nv.begin();
      while (a != nu.end() && b != nv.end()) {
        if (*a < *b) ++a;
        else if (*b < *a) ++b;
        else { ++common; ++a; ++b; }
      }
      std::size_t back = std::lower_bound(nv.begin(), nv.end(), u) - nv.begin();
      d.tri[d.base[u] + i] = common;
      d.tri[d.base[v] + back] = common;
    }
  }
  return d;
}

// Number of 4-cliques containing each node; each clique a>b>c>d is found
// once from its two largest members.
std::vector<Count> clique4_counts(const Graph &g, const AdjacencyTest &adjacent) {
  const std::size_t n = g.num_nodes();
  std::vector<Count> k4(n, 0);
  std::vector<NodeId> common;
  for (NodeId x = 0; x < n; ++x) {
    for (NodeId y : g.neighbors(x)) {
      if (y >= x) break;
      common.clear();
      for (NodeId z : g.neighbors(y)) {
        if (z >= y) break;
        if (adjacent(x, z)) common.push_back(z);
      }
      for (std::size_t i = 0; i < common.size(); ++i)
        for (std::size_t j = i + 1; j < common.size(); ++j)
          if (adjacent(common[i], common[j])) {
            ++k4[x];
            ++k4[y];
            ++k4[common[i]];
            ++k4[common[j]];
          }
    }
  }
  return k4;
}

void count_range(const Graph &g, const AdjacencyTest &adjacent, const ArcData &arcs,
                 const std::vector<Count> &k4, NodeId first, NodeId last,
                 GdvMatrix &out) {
  const std::size_t n = g.num_nodes();
  auto deg = [&](NodeId u) { return static_cast<Count>(g.degree(u)); };
  auto tri_at = [&](NodeId u, std::size_t i) { return arcs.tri[arcs.base[u] + i]; };

  // common[z] = number of paths x-y-z with z not adjacent to x.
  std::vector<Count> common(n, 0);
  std::vector<NodeId> touched;

  for (NodeId x = first; x < last; ++x) {
    for (NodeId z : touched) common[z] = 0;
    touched.clear();

    // Each accumulator equals a fixed linear combination of orbit counts,
    // named after the orbits it mixes.
    Count f_12_14 = 0, f_10_13 = 0, f_13_14 = 0, f_11_13 = 0;
    Count f_7_11 = 0, f_5_8 = 0, f_6_9 = 0, f_9_12 = 0, f_4_8 = 0, f_8_12 = 0;
    const Count f_14 = k4[x];
    Count o1 = 0, o2 = 0, o3 = 0;

    auto nx = g.neighbors(x);
    const Count dx = deg(x);

    // x as the middle node / triangle member.
    for (std::size_t i = 0; i < nx.size(); ++i) {
      const NodeId y = nx[i];
      const Count t_xy = tri_at(x, i);
      auto ny = g.neighbors(y);
      for (std::size_t j = 0; j < ny.size(); ++j) {
        const NodeId z = ny[j];
        if (z == x) continue;
        if (adjacent(x, z)) {
          if (z < y) {
            const Count t_yz = tri_at(y, j);
            f_12_14 += t_yz - 1;                                  // o12 + 3 o14
            f_10_13 += (deg(y) - 1 - t_yz) + (deg(z) - 1 - t_yz);  // o10 + 2 o13
          }
        } else {
          if (common[z] == 0) touched.push_back(z);
          ++common[z];
        }
      }
      for (std::size_t k = i + 1; k < nx.size(); ++k) {
        const NodeId z = nx[k];
        const Count t_xz = tri_at(x, k);
        if (adjacent(y, z)) {
          ++o3;
          f_13_14 += (t_xy - 1) + (t_xz - 1);            // 2 o13 + 6 o14
          f_11_13 += (dx - 1 - t_xy) + (dx - 1 - t_xz);  // 2 o11 + 2 o13
        } else {
          ++o2;
          f_7_11 += (dx - 2 - t_xy) + (dx - 2 - t_xz);             // 6 o7 + 2 o11
          f_5_8 += (deg(y) - 1 - t_xy) + (deg(z) - 1 - t_xz);       // o5 + 2 o8
        }
      }
    }

    // x as an end node of an induced 3-path x-y-z.
    for (std::size_t i = 0; i < nx.size(); ++i) {
      const NodeId y = nx[i];
      const Count t_xy = tri_at(x, i);
      auto ny = g.neighbors(y);
      for (std::size_t j = 0; j < ny.size(); ++j) {
        const NodeId z = ny[j];
        if (z == x || adjacent(x, z)) continue;
        const Count t_yz = tri_at(y, j);
        ++o1;
        f_6_9 += deg(y) - 2 - t_xy;   // 2 o6 + 2 o9
        f_9_12 += t_yz;               // 2 o9 + 2 o12
        f_4_8 += deg(z) - 1 - t_yz;   // o4 + 2 o8
        f_8_12 += common[z] - 1;      // 2 o8 + 2 o12
      }
    }

    Count o[kNumOrbits];
    o[0] = dx;
    o[1] = o1;
    o[2] = o2;
    o[3] = o3;
    o[14] = f_14;
    o[13] = (f_13_14 - 6 * f_14) / 2;
    o[12] = f_12_14 - 3 * f_14;
    o[11] = (f_11_13 - f_13_14 + 6 * f_14) / 2;
    o[10] = f_10_13 - f_13_14 + 6 * f_14;
    o[9] = (f_9_12 - 2 * f_12_14 + 6 * f_14) / 2;
    o[8] = (f_8_12 - 2 * f_12_14 + 6 * f_14) / 2;
    o[7] = (f_13_14 + f_7_11 - f_11_13 - 6 * f_14) / 6;
    o[6] = (2 * f_12_14 + f_6_9 - f_9_12 - 6 * f_14) / 2;
    o[5] = 2 * f_12_14 + f_5_8 - f_8_12 - 6 * f_14;
    o[4] = 2 * f_12_14 + f_4_8 - f_8_12 - 6 * f_14;
    for (std::size_t k = 0; k < kNumOrbits; ++k) out[x][k] = static_cast<std::uint64_t>(o[k]);
  }
}

// --- brute-force oracle -----------------------------------------------------

struct Canonical {
  int size;
  std::vector<std::pair<int, int>> edges;
  std::array<int, 4> orbit;
};

const std::vector<Canonical> &canonical_graphlets() {
  static const std::vector<Canonical> kGraphlets = {
      {2, {{0, 1}}, {0, 0, -1, -1}},
      {3, {{0, 1}, {1, 2}}, {1, 2, 1, -1}},
      {3, {{0, 1}, {1, 2}, {0, 2}}, {3, 3, 3, -1}},
      {4, {{0, 1}, {1, 2}, {2, 3}}, {4, 5, 5, 4}},
      {4, {{0, 1}, {0, 2}, {0, 3}}, {7, 6, 6, 6}},
      {4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, {8, 8, 8, 8}},
      {4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}, {10, 10, 11, 9}},
      {4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, {12, 12, 13, 13}},
      {4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, {14, 14, 14, 14}},
  };
  return kGraphlets;
}

int pair_bit(int i, int j, int size) {
  if (i > j) std::swap(i, j);
  int bit = 0;
  for (int a = 0; a < size; ++a)
    for (int b = a + 1; b < size; ++b, ++bit)
      if (a == i && b == j) return bit;
  return -1;
}

using OrbitTable = std::vector<std::optional<std::array<int, 4>>>;

// For each induced-subgraph bitmask on `size` positions, the orbit of every
// position, or nullopt when the subgraph is disconnected.
OrbitTable build_orbit_table(int size) {
  const int num_pairs = size * (size - 1) / 2;
  OrbitTable table(std::size_t(1) << num_pairs);
  for (const Canonical &c : canonical_graphlets()) {
    if (c.size != size) continue;
    std::array<int, 4> perm{0, 1, 2, 3};
    do {
      // Position i of the subset plays role perm[i] of the canonical graphlet.
      unsigned mask = 0;
      for (auto [a, b] : c.edges) {
        int i = int(std::find(perm.begin(), perm.begin() + size, a) - perm.begin());
        int j = int(std::find(perm.begin(), perm.begin() + size, b) - perm.begin());
        mask |= 1u << pair_bit(i, j, size);
      }
      std::array<int, 4> orbits{-1, -1, -1, -1};
      for (int i = 0; i < size; ++i) orbits[i] = c.orbit[perm[i]];
      table[mask] = orbits;
    } while (std::next_permutation(perm.begin(), perm.begin() + size));
  }
  return table;
}

}  // namespace

GdvMatrix count_orbits(const Graph &g, unsigned threads) {
  const std::size_t n = g.num_nodes();
  GdvMatrix out(n, Gdv{});
  if (n == 0) return out;

  AdjacencyTest adjacent(g);
  ArcData arcs = arc_triangles(g);
  std::vector<Count> k4 = clique4_counts(g, adjacent);

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    count_range(g, adjacent, arcs, k4, 0, static_cast<NodeId>(n), out);
    return out;
  }
  std::vector<std::jthread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    auto first = static_cast<NodeId>(n * t / threads);
    auto last = static_cast<NodeId>(n * (t + 1) / threads);
    workers.emplace_back([&, first, last] { count_range(g, adjacent, arcs, k4, first, last, out); });
  }
  return out;
}

GdvMatrix brute_force_orbits(const Graph &g) {
  const std::size_t n = g.num_nodes();
  GdvMatrix out(n, Gdv{});
  std::vector<char> adj(n * n, 0);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v : g.neighbors(u)) adj[u * n + v] = 1;
  auto a = [&](NodeId u, NodeId v) { return adj[std::size_t(u) * n + v] != 0; };

  static const OrbitTable table2 = build_orbit_table(2);
  static const OrbitTable table3 = build_orbit_table(3);
  static const OrbitTable table4 = build_orbit_table(4);

  auto tally = [&](const OrbitTable &table, unsigned mask, std::initializer_list<NodeId> nodes) {
    const auto &orbits = table[mask];
    if (!orbits) return;
    int i = 0;
    for (NodeId u : nodes) ++out[u][(*orbits)[i++]];
  };

  for (NodeId p = 0; p < n; ++p)
    for (NodeId q = p + 1; q < n; ++q) {
      tally(table2, a(p, q) ? 1u : 0u, {p, q});
      for (NodeId r = q + 1; r < n; ++r) {
        unsigned m3 = (a(p, q) ? 1u : 0u) | (a(p, r) ? 2u : 0u) | (a(q, r) ? 4u : 0u);
        tally(table3, m3, {p, q, r});
        for (NodeId s = r + 1; s < n; ++s) {
          // Pair bits in order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
          unsigned m4 = (a(p, q) ? 1u : 0u) | (a(p, r) ? 2u : 0u) | (a(p, s) ? 4u : 0u) |
                        (a(q, r) ? 8u : 0u) | (a(q, s) ? 16u : 0u) | (a(r, s) ? 32u : 0u);
          tally(table4, m4, {p, q, r, s});
        }
      }
    }
  return out;
}

void write_gdv(const Graph &g, const GdvMatrix &gdv, std::ostream &out) {
  if (gdv.size() != g.num_nodes())
    throw ParameterError("GDV row count does not match node count");
  for (NodeId u = 0; u < gdv.size(); ++u) {
    out << g.label(u);
    for (std::uint64_t c : gdv[u]) out << ' ' << c;
    out << '\n';
  }
}

LabeledGdv read_gdv(std::istream &in) {
  LabeledGdv out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::string label;
    row >> label;
    Gdv counts{};
    for (std::size_t k = 0; k < kNumOrbits; ++k) {
      std::string token;
      if (!(row >> token))
        throw FormatError("expected 15 orbit counts after the label", line_no);
      if (token.find_first_not_of("0123456789") != std::string::npos)
        throw FormatError("orbit count '" + token + "' is not a non-negative integer", line_no);
      try {
        counts[k] = std::stoull(token);
      } catch (const std::exception &) {
        throw FormatError("orbit count '" + token + "' out of range", line_no);
      }
    }
    std::string extra;
    if (row >> extra) throw FormatError("more than 15 orbit counts", line_no);
    out.labels.push_back(std::move(label));
    out.gdv.push_back(counts);
  }
  return out;
}

LabeledGdv read_gdv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_gdv(in);
}

}  // namespace gdvalign
