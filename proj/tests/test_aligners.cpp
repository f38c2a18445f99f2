#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "gdvalign/aligners.h"
#include "gdvalign/errors.h"
#include "gdvalign/generators.h"
#include "gdvalign/graphlets.h"
#include "test_support.h"

namespace gdvalign {
namespace {

using testing::make_graph;

std::vector<NodeId> identity(std::size_t n) {
  std::vector<NodeId> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

SimilarityMatrix diagonal(std::size_t n) {
  SimilarityMatrix s(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) s(i, i) = 1.0;
  return s;
}

// S3 by direct set arithmetic over the image, independent of the library.
double s3_oracle(const Graph &g1, const Graph &g2, const std::vector<NodeId> &map) {
  std::size_t conserved = 0, induced = 0;
  for (const Edge &e : g1.edges()) conserved += g2.has_edge(map[e.u], map[e.v]) ? 1 : 0;
  for (std::size_t i = 0; i < map.size(); ++i)
    for (std::size_t j = i + 1; j < map.size(); ++j) induced += g2.has_edge(map[i], map[j]) ? 1 : 0;
  const double denom = double(g1.num_edges() + induced - conserved);
  return denom == 0 ? 0.0 : double(conserved) / denom;
}

TEST(S3, TriangleIntoPathIsTwoThirds) {
  Graph tri = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  Graph path = make_graph(3, {{0, 1}, {1, 2}});
  Alignment a{identity(3), false};
  EXPECT_EQ(s3_score(tri, path, a), 2.0 / 3.0);
  EXPECT_EQ(s3_oracle(tri, path, a.mapping), 2.0 / 3.0);
}

TEST(S3, IdentitySelfAlignmentIsOne) {
  Graph g = generate_sf(100, 300, 4);
  EXPECT_EQ(s3_score(g, g, Alignment{identity(100), false}), 1.0);
}

TEST(S3, ZeroConservationIsZero) {
  Graph a = make_graph(4, {{0, 1}, {2, 3}});
  Graph b = make_graph(4, {{0, 2}, {1, 3}});
  EXPECT_EQ(s3_score(a, b, Alignment{identity(4), false}), 0.0);
}

TEST(S3, MatchesOracleAndInvariantUnderConsistentRelabeling) {
  std::mt19937_64 rng(2);
  Graph g1 = testing::erdos_renyi(25, 0.2, 1);
  Graph g2 = testing::erdos_renyi(30, 0.2, 2);
  std::vector<NodeId> image = identity(30);
  std::shuffle(image.begin(), image.end(), rng);
  image.resize(25);
  Alignment a{image, false};
  const double s = s3_score(g1, g2, a);
  EXPECT_NEAR(s, s3_oracle(g1, g2, image), 1e-15);

  std::vector<NodeId> p1 = identity(25), p2 = identity(30);
  std::shuffle(p1.begin(), p1.end(), rng);
  std::shuffle(p2.begin(), p2.end(), rng);
  auto relabel = [](const Graph &g, const std::vector<NodeId> &p) {
    std::vector<Edge> e;
    for (const Edge &x : g.edges()) e.push_back({p[x.u], p[x.v]});
    return Graph::from_edges(g.num_nodes(), e);
  };
  Graph h1 = relabel(g1, p1), h2 = relabel(g2, p2);
  std::vector<NodeId> moved(25);
  for (NodeId u = 0; u < 25; ++u) moved[p1[u]] = p2[image[u]];
  EXPECT_NEAR(s3_score(h1, h2, Alignment{moved, false}), s, 1e-15);
}

TEST(NodeCorrectness, HandValues) {
  EXPECT_EQ(node_correctness(Alignment{{0, 1, 2, 3}, false}, {0, 1, 2, 3}), 1.0);
  EXPECT_EQ(node_correctness(Alignment{{0, 1, 3, 2}, false}, {0, 1, 2, 3}), 0.5);
}

TEST(NodeCorrectness, RandomMappingNearOneOverN) {
  std::mt19937_64 rng(8);
  const std::vector<NodeId> truth = identity(1000);
  double sum = 0.0;
  for (int r = 0; r < 100; ++r) {
    std::vector<NodeId> m = identity(1000);
    std::shuffle(m.begin(), m.end(), rng);
    sum += node_correctness(Alignment{m, false}, truth);
  }
  // Fixed points of a uniform permutation: mean 1, variance 1.
  EXPECT_NEAR(sum / 100.0, 1.0 / 1000.0, 4.0 * 0.1 / 1000.0);
}

TEST(Validate, RejectsPartialAndNonInjective) {
  Graph g = make_graph(3, {{0, 1}, {1, 2}});
  EXPECT_THROW(validate_alignment(g, g, Alignment{{0, 1}, false}), ParameterError);
  EXPECT_THROW(validate_alignment(g, g, Alignment{{0, 0, 1}, false}), ParameterError);
  EXPECT_THROW(validate_alignment(g, g, Alignment{{0, 1, 5}, false}), ParameterError);
  EXPECT_NO_THROW(validate_alignment(g, g, Alignment{{2, 1, 0}, false}));
}

TEST(Wave, DiagonalSimilarityGivesIdentity) {
  Graph g = generate_geo(300, 1200, 3);
  Alignment a = wave_align(g, g, diagonal(300));
  validate_alignment(g, g, a);
  EXPECT_EQ(node_correctness(a, identity(300)), 1.0);
}

TEST(Wave, HandTraceEdgeIntoPath) {
  Graph g1 = make_graph(2, {{0, 1}});          // a=0, b=1
  Graph g2 = make_graph(3, {{0, 1}, {1, 2}});  // x=0, y=1, z=2
  SimilarityMatrix s(2, 3, 0.1);
  s(0, 1) = 1.0;
  Alignment a = wave_align(g1, g2, s);
  EXPECT_FALSE(a.swapped);
  EXPECT_EQ(a.mapping, (std::vector<NodeId>{1, 0}));
}

TEST(Wave, OrientsSmallerGraphFirst) {
  Graph big = make_graph(3, {{0, 1}, {1, 2}});
  Graph small = make_graph(2, {{0, 1}});
  SimilarityMatrix s(3, 2, 0.1);
  s(1, 0) = 1.0;
  Alignment a = wave_align(big, small, s);
  EXPECT_TRUE(a.swapped);
  EXPECT_EQ(a.mapping, (std::vector<NodeId>{1, 0}));
  validate_alignment(big, small, a);
}

TEST(Wave, DeterministicTotalInjective) {
  Graph g = generate_sf(400, 1600, 6);
  NoisePair p = rewire(g, 10, 2);
  LabeledGdv a{g.labels(), count_orbits(g)}, b{p.noisy.labels(), count_orbits(p.noisy)};
  SimilarityMatrix s = graphlet_similarity(a, b);
  Alignment x = wave_align(g, p.noisy, s);
  Alignment y = wave_align(g, p.noisy, s);
  EXPECT_EQ(x, y);
  validate_alignment(g, p.noisy, x);
  validate_alignment(g, p.noisy, wave_align(g, p.noisy, s, WaveOptions{false}));
}

TEST(Wave, DegenerateSimilarityStillTerminates) {
  Graph g1 = testing::erdos_renyi(30, 0.1, 1);
  Graph g2 = testing::erdos_renyi(40, 0.1, 2);
  Alignment a = wave_align(g1, g2, SimilarityMatrix(30, 40, 0.5));
  validate_alignment(g1, g2, a);
}

TEST(Wave, RejectsMismatchedSimilarity) {
  Graph g = make_graph(3, {{0, 1}});
  EXPECT_THROW(wave_align(g, g, SimilarityMatrix(2, 3, 0.0)), ParameterError);
}

TEST(Sa, SelfAlignmentFromIdentityIsOptimal) {
  Graph g = generate_geo(200, 800, 9);
  SaConfig cfg;
  cfg.w_s3 = 1.0;
  cfg.w_esim = 0.0;
  cfg.move_budget = 20000;
  cfg.init = SaInit::kGiven;
  cfg.initial_mapping = identity(200);
  SaResult r = sa_align(g, g, SimilarityMatrix(200, 200, 0.0), cfg);
  EXPECT_EQ(r.objective, 1.0);
  EXPECT_EQ(r.s3, 1.0);
  EXPECT_EQ(r.alignment.mapping, identity(200));
}

double best_esim_exhaustive(const SimilarityMatrix &s) {
  std::vector<NodeId> p = identity(s.rows());
  double best = -1.0;
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += s(i, p[i]);
    best = std::max(best, sum / double(p.size()));
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

TEST(Sa, RecoversDominantMatchingOnToyInstances) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> low(0.0, 0.6);
  int recovered = 0;
  for (std::uint64_t run = 0; run < 20; ++run) {
    std::vector<NodeId> hidden = identity(5);
    std::shuffle(hidden.begin(), hidden.end(), rng);
    SimilarityMatrix s(5, 5, 0.0);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) s(i, j) = j == hidden[i] ? 0.8 + 0.2 * low(rng) : low(rng);
    Graph g1 = testing::erdos_renyi(5, 0.5, run), g2 = testing::erdos_renyi(5, 0.5, run + 100);
    SaConfig cfg;
    cfg.w_s3 = 0.0;
    cfg.w_esim = 1.0;
    cfg.move_budget = 100000;
    cfg.seed = run;
    SaResult r = sa_align(g1, g2, s, cfg);
    if (r.alignment.mapping == hidden && std::abs(r.esim - best_esim_exhaustive(s)) < 1e-12)
      ++recovered;
  }
  EXPECT_GE(recovered, 19);
}

TEST(Sa, BestTraceIsNonDecreasing) {
  Graph g = generate_sf(150, 600, 1);
  NoisePair p = rewire(g, 25, 3);
  SaConfig cfg;
  cfg.move_budget = 50000;
  cfg.trace_stride = 500;
  cfg.seed = 4;
  SaResult r = sa_align(g, p.noisy, SimilarityMatrix(150, 150, 0.3), cfg);
  ASSERT_EQ(r.best_trace.size(), 100u);
  EXPECT_TRUE(std::is_sorted(r.best_trace.begin(), r.best_trace.end()));
  EXPECT_NEAR(r.best_trace.back(), r.objective, 1e-9);
}

TEST(Sa, ReproducibleWithMoveBudget) {
  Graph g1 = generate_sf(120, 400, 2);
  Graph g2 = generate_sf(140, 500, 3);
  SimilarityMatrix s(120, 140, 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (std::size_t i = 0; i < 120; ++i)
    for (std::size_t j = 0; j < 140; ++j) s(i, j) = d(rng);
  SaConfig cfg;
  cfg.move_budget = 30000;
  cfg.seed = 77;
  SaResult a = sa_align(g1, g2, s, cfg), b = sa_align(g1, g2, s, cfg);
  EXPECT_EQ(a.alignment, b.alignment);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.moves, 30000u);
  validate_alignment(g1, g2, a.alignment);
  EXPECT_NEAR(a.objective, sa_objective(g1, g2, s, a.alignment, 1.0, 1.0), 1e-15);
}

TEST(Sa, SwappedInputsAndGreedyInit) {
  Graph big = generate_sf(80, 240, 2);
  Graph small = generate_sf(60, 180, 3);
  SimilarityMatrix s(80, 60, 0.2);
  SaConfig cfg;
  cfg.move_budget = 5000;
  cfg.init = SaInit::kGreedy;
  SaResult r = sa_align(big, small, s, cfg);
  EXPECT_TRUE(r.alignment.swapped);
  validate_alignment(big, small, r.alignment);
}

TEST(SaConfig, Validation) {
  SaConfig bad;
  bad.w_s3 = 0.0;
  bad.w_esim = 0.0;
  EXPECT_THROW(bad.validate(), ParameterError);
  SaConfig neg;
  neg.time_budget_s = 0.0;
  EXPECT_THROW(neg.validate(), ParameterError);
  SaConfig w;
  w.w_esim = -1.0;
  EXPECT_THROW(w.validate(), ParameterError);
}

TEST(AlignmentFile, WritesSmallerGraphFirst) {
  Graph g1 = parse_edge_list("p q\nq r\n").graph;
  Graph g2 = parse_edge_list("x y\n").graph;
  Alignment a{{1, 0}, true};
  std::ostringstream out;
  write_alignment(g1, g2, a, out);
  EXPECT_EQ(out.str(), "x\tq\ny\tp\n");
  auto pairs = read_label_pairs(out.str());
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[1].first, "y");
  EXPECT_EQ(pairs[1].second, "p");
  EXPECT_THROW(read_label_pairs("lonely\n"), FormatError);
}

}  // namespace
}  // namespace gdvalign
