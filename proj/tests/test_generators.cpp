#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "gdvalign/errors.h"
#include "gdvalign/generators.h"

namespace gdvalign {
namespace {

std::size_t overlap(const Graph &a, const Graph &b) {
  std::size_t shared = 0;
  for (const Edge &e : a.edges()) shared += b.has_edge(e.u, e.v) ? 1 : 0;
  return shared;
}

TEST(GenerateGeo, PaperSize) {
  Graph g = generate_geo(1000, 6000, 1);
  g.check_invariants();
  EXPECT_EQ(g.num_nodes(), 1000u);
  EXPECT_EQ(g.num_edges(), 6000u);
}

TEST(GenerateGeo, TwoNodesSingleEdge) {
  Graph g = generate_geo(2, 1, 5);
  EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 1}}));
}

TEST(GenerateGeo, Deterministic) {
  EXPECT_EQ(generate_geo(300, 900, 42), generate_geo(300, 900, 42));
  EXPECT_NE(generate_geo(300, 900, 42).edges(), generate_geo(300, 900, 43).edges());
}

TEST(GenerateGeo, GridPathMatchesExactEdgeCount) {
  // Large enough to leave the all-pairs path.
  Graph g = generate_geo(4000, 12000, 9);
  g.check_invariants();
  EXPECT_EQ(g.num_edges(), 12000u);
}

TEST(GenerateGeo, RejectsOutOfRange) {
  EXPECT_THROW(generate_geo(1, 0, 0), ParameterError);
  EXPECT_THROW(generate_geo(4, 0, 0), ParameterError);
  EXPECT_THROW(generate_geo(4, 7, 0), ParameterError);
}

TEST(GenerateSf, PaperSize) {
  Graph g = generate_sf(1000, 6000, 1);
  g.check_invariants();
  EXPECT_EQ(g.num_nodes(), 1000u);
  EXPECT_EQ(g.num_edges(), 6000u);
}

TEST(GenerateSf, Deterministic) {
  EXPECT_EQ(generate_sf(500, 2000, 8), generate_sf(500, 2000, 8));
}

TEST(GenerateSf, HeavyTailedOverSeeds) {
  int heavy = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g = generate_sf(1000, 6000, seed);
    std::size_t max_degree = 0;
    for (NodeId u = 0; u < g.num_nodes(); ++u) max_degree = std::max(max_degree, g.degree(u));
    if (double(max_degree) > 4.0 * (2.0 * 6000 / 1000)) ++heavy;
  }
  EXPECT_GE(heavy, 9);
}

TEST(GenerateSf, ExactEdgeCountAcrossDensities) {
  for (std::size_t m : {10u, 99u, 100u, 1000u, 4000u}) {
    Graph g = generate_sf(100, m, m);
    g.check_invariants();
    EXPECT_EQ(g.num_edges(), m);
  }
  EXPECT_THROW(generate_sf(2, 1, 0), ParameterError);
  EXPECT_THROW(generate_sf(10, 46, 0), ParameterError);
}

TEST(Rewire, ZeroNoiseIsIdentity) {
  Graph g = generate_geo(200, 600, 3);
  NoisePair p = rewire(g, 0, 7);
  EXPECT_EQ(p.noisy, g);
  EXPECT_EQ(p.noise_pct, 0);
  for (NodeId u = 0; u < g.num_nodes(); ++u) EXPECT_EQ(p.true_mapping[u], u);
}

TEST(Rewire, HalfNoiseRemovesAndAddsExactCount) {
  Graph g = generate_geo(1000, 6000, 3);
  NoisePair p = rewire(g, 50, 7);
  p.noisy.check_invariants();
  EXPECT_EQ(p.noisy.num_nodes(), 1000u);
  EXPECT_EQ(p.noisy.num_edges(), 6000u);
  // Removed edges are exactly the ones missing from the noisy graph; added
  // ones may coincide with removed ones, so kept ≥ 3000.
  const std::size_t kept = overlap(g, p.noisy);
  EXPECT_GE(kept, 3000u);
  EXPECT_LE(kept, 3000u + 20u);
}

TEST(Rewire, CeilingOfFractionalCount) {
  Graph g = generate_sf(50, 101, 2);
  NoisePair p = rewire(g, 10, 4);  // ceil(10.1) = 11 removed
  EXPECT_EQ(p.noisy.num_edges(), 101u);
  EXPECT_GE(overlap(g, p.noisy), 90u);
}

TEST(Rewire, ReproducibleBitExactly) {
  Graph g = generate_sf(300, 1200, 1);
  EXPECT_EQ(rewire(g, 25, 99).noisy, rewire(g, 25, 99).noisy);
  EXPECT_EQ(rewire(g, 25, 99, RewireMode::kDegreePreserving).noisy,
            rewire(g, 25, 99, RewireMode::kDegreePreserving).noisy);
}

TEST(Rewire, FullNoiseLeavesLittleOverlap) {
  Graph g = generate_geo(1000, 6000, 5);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    NoisePair p = rewire(g, 100, seed);
    total += double(overlap(g, p.noisy)) / 6000.0;
  }
  EXPECT_LT(total / 20.0, 0.05);
}

TEST(Rewire, MonotoneDisruption) {
  Graph g = generate_geo(500, 2000, 6);
  double previous = 1e18;
  for (int pct : {0, 10, 25, 50, 75, 100}) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      sum += double(overlap(g, rewire(g, pct, seed).noisy));
    EXPECT_LE(sum / 20.0, previous) << "noise " << pct;
    previous = sum / 20.0;
  }
}

TEST(Rewire, DegreePreservingKeepsDegrees) {
  Graph g = generate_sf(300, 1200, 4);
  NoisePair p = rewire(g, 50, 3, RewireMode::kDegreePreserving);
  p.noisy.check_invariants();
  EXPECT_EQ(p.noisy.num_edges(), g.num_edges());
  for (NodeId u = 0; u < g.num_nodes(); ++u) EXPECT_EQ(p.noisy.degree(u), g.degree(u));
  EXPECT_LT(overlap(g, p.noisy), g.num_edges());
}

TEST(Rewire, RejectsOutOfRangePercent) {
  Graph g = generate_sf(20, 40, 1);
  EXPECT_THROW(rewire(g, -1, 0), ParameterError);
  EXPECT_THROW(rewire(g, 101, 0), ParameterError);
}

TEST(Rewire, DenseGraphExhaustsPoolCleanly) {
  // Complete graph: no non-edges exist, removal frees exactly the needed pool.
  std::vector<Edge> e;
  for (NodeId u = 0; u < 6; ++u)
    for (NodeId v = u + 1; v < 6; ++v) e.push_back({u, v});
  Graph k6 = Graph::from_edges(6, e);
  NoisePair p = rewire(k6, 100, 1);
  EXPECT_EQ(p.noisy.num_edges(), 15u);
}

TEST(Seeds, DerivedSeedsDistinguishCells) {
  std::set<std::uint64_t> seen;
  for (int noise : {0, 10, 25})
    for (int instance = 0; instance < 5; ++instance)
      for (const char *net : {"geo", "sf"}) seen.insert(derive_seed(7, net, noise, instance));
  EXPECT_EQ(seen.size(), 30u);
  EXPECT_EQ(derive_seed(7, "geo", 10, 2), derive_seed(7, "geo", 10, 2));
  EXPECT_NE(derive_seed(7, "geo"), derive_seed(8, "geo"));
}

}  // namespace
}  // namespace gdvalign
