#include "gdvalign/generators.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>
#include <unordered_set>

#include "gdvalign/errors.h"

namespace gdvalign {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t total_pairs(std::size_t n) { return std::uint64_t(n) * (n - 1) / 2; }

std::uint64_t pair_key(NodeId u, NodeId v, std::size_t n) {
  if (u > v) std::swap(u, v);
  return std::uint64_t(u) * n + v;
}

// Edge set with O(1) membership and uniform removal by index.
class EdgeBag {
 public:
  explicit EdgeBag(std::size_t n) : n_(n) {}

  bool contains(NodeId u, NodeId v) const { return keys_.count(pair_key(u, v, n_)) != 0; }

  bool insert(NodeId u, NodeId v) {
    if (u == v || !keys_.insert(pair_key(u, v, n_)).second) return false;
    edges_.push_back({std::min(u, v), std::max(u, v)});
    return true;
  }

  void erase_at(std::size_t i) {
    keys_.erase(pair_key(edges_[i].u, edges_[i].v, n_));
    edges_[i] = edges_.back();
    edges_.pop_back();
  }

  std::size_t size() const { return edges_.size(); }
  const std::vector<Edge> &edges() const { return edges_; }
  std::size_t n() const { return n_; }

 private:
  std::size_t n_;
  std::unordered_set<std::uint64_t> keys_;
  std::vector<Edge> edges_;
};

void remove_uniform_edges(EdgeBag &bag, std::size_t count, Rng &rng) {
  for (std::size_t r = 0; r < count; ++r) {
    std::uniform_int_distribution<std::size_t> pick(0, bag.size() - 1);
    bag.erase_at(pick(rng));
  }
}

// Adds `count` edges drawn uniformly from the current non-edges.
void add_uniform_non_edges(EdgeBag &bag, std::size_t count, Rng &rng) {
  if (count == 0) return;
  const std::size_t n = bag.n();
  const std::uint64_t pairs = total_pairs(n);
  const std::uint64_t free_pairs = pairs - bag.size();
  if (free_pairs < count) throw InternalError("non-edge pool exhausted");

  if (free_pairs * 4 >= pairs) {
    // Sparse enough for rejection sampling to terminate quickly.
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
    std::size_t added = 0;
    while (added < count) {
      NodeId u = node(rng), v = node(rng);
      if (bag.insert(u, v)) ++added;
    }
    return;
  }
  std::vector<Edge> pool;
  pool.reserve(free_pairs);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (!bag.contains(u, v)) pool.push_back({u, v});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
    bag.insert(pool[i].u, pool[i].v);
  }
}

void check_size(std::size_t n, std::size_t m, std::size_t min_n) {
  if (n < min_n)
    throw ParameterError("node count must be at least " + std::to_string(min_n));
  if (m < 1 || m > total_pairs(n))
    throw ParameterError("edge count " + std::to_string(m) + " out of range [1, " +
                         std::to_string(total_pairs(n)) + "]");
}

using Point = std::array<double, 3>;

double dist2(const Point &a, const Point &b) {
  double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

struct CandidatePair {
  double d2;
  NodeId u, v;
  bool operator<(const CandidatePair &o) const {
    return std::tie(d2, u, v) < std::tie(o.d2, o.u, o.v);
  }
};

// All pairs within sqrt(r2), using a uniform cell grid of side >= radius.
std::vector<CandidatePair> pairs_within(const std::vector<Point> &pts, double r2) {
  const double radius = std::sqrt(r2);
  const int cells = std::max(1, std::min(256, static_cast<int>(1.0 / radius)));
  auto cell_of = [&](double x) { return std::min(cells - 1, static_cast<int>(x * cells)); };
  auto flat = [&](int x, int y, int z) { return (std::size_t(x) * cells + y) * cells + z; };

  std::vector<std::vector<NodeId>> grid(std::size_t(cells) * cells * cells);
  for (NodeId i = 0; i < pts.size(); ++i)
    grid[flat(cell_of(pts[i][0]), cell_of(pts[i][1]), cell_of(pts[i][2]))].push_back(i);

  std::vector<CandidatePair> out;
  for (NodeId i = 0; i < pts.size(); ++i) {
    int cx = cell_of(pts[i][0]), cy = cell_of(pts[i][1]), cz = cell_of(pts[i][2]);
    for (int x = std::max(0, cx - 1); x <= std::min(cells - 1, cx + 1); ++x)
      for (int y = std::max(0, cy - 1); y <= std::min(cells - 1, cy + 1); ++y)
        for (int z = std::max(0, cz - 1); z <= std::min(cells - 1, cz + 1); ++z)
          for (NodeId j : grid[flat(x, y, z)]) {
            if (j <= i) continue;
            double d = dist2(pts[i], pts[j]);
            if (d <= r2) out.push_back({d, i, j});
          }
  }
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view network) noexcept {
  return mix64(mix64(master) ^ fnv1a(network));
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view network,
                          int noise_pct, int instance) noexcept {
  std::uint64_t h = derive_seed(master, network);
  h = mix64(h ^ static_cast<std::uint64_t>(noise_pct));
  return mix64(h ^ static_cast<std::uint64_t>(instance));
}

Graph generate_geo(std::size_t n, std::size_t m, std::uint64_t seed) {
  check_size(n, m, 2);
  Rng rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  std::vector<Point> pts(n);
  for (auto &p : pts) p = {coord(rng), coord(rng), coord(rng)};

  const std::uint64_t pairs = total_pairs(n);
  std::vector<CandidatePair> cand;
  if (pairs <= 4'000'000 || m * 8 > pairs) {
    cand.reserve(pairs);
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j) cand.push_back({dist2(pts[i], pts[j]), i, j});
  } else {
    // Expected pairs within r (ignoring boundary loss) is pairs * 4/3 pi r^3.
    double r3 = 1.5 * double(m) / (double(pairs) * 4.0 / 3.0 * std::numbers::pi);
    double r = std::cbrt(r3);
    for (;;) {
      cand = pairs_within(pts, r * r);
      if (cand.size() >= m) break;
      r *= 1.3;
    }
  }
  std::nth_element(cand.begin(), cand.begin() + (m - 1), cand.end());
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) edges.push_back({cand[i].u, cand[i].v});
  return Graph::from_edges(n, edges);
}

Graph generate_sf(std::size_t n, std::size_t m, std::uint64_t seed) {
  check_size(n, m, 3);
  Rng rng(seed);
  std::size_t k = static_cast<std::size_t>(std::llround(double(m) / double(n)));
  k = std::clamp<std::size_t>(k, 1, n - 1);

  EdgeBag bag(n);
  std::vector<NodeId> endpoints;  // each node appears once per incident edge
  for (NodeId u = 0; u < k; ++u)
    for (NodeId v = u + 1; v < k; ++v) {
      bag.insert(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }

  std::vector<NodeId> targets;
  for (NodeId v = static_cast<NodeId>(k); v < n; ++v) {
    targets.clear();
    while (targets.size() < k) {
      NodeId t;
      if (endpoints.empty()) {
        t = std::uniform_int_distribution<NodeId>(0, v - 1)(rng);
      } else {
        t = endpoints[std::uniform_int_distribution<std::size_t>(0, endpoints.size() - 1)(rng)];
      }
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      bag.insert(v, t);
      endpoints.push_back(v);
      endpoints.push_back(t);
    }
  }

  if (bag.size() > m) remove_uniform_edges(bag, bag.size() - m, rng);
  else add_uniform_non_edges(bag, m - bag.size(), rng);
  return Graph::from_edges(n, bag.edges());
}

NoisePair rewire(const Graph &g, int noise_pct, std::uint64_t seed, RewireMode mode) {
  if (noise_pct < 0 || noise_pct > 100)
    throw ParameterError("noise percentage must be within [0, 100]");
  const std::size_t n = g.num_nodes();
  const std::size_t m = g.num_edges();
  const std::size_t k = (std::size_t(noise_pct) * m + 99) / 100;

  Rng rng(seed);
  EdgeBag bag(n);
  for (const Edge &e : g.edges()) bag.insert(e.u, e.v);

  if (mode == RewireMode::kRemoveAdd) {
    remove_uniform_edges(bag, k, rng);
    add_uniform_non_edges(bag, k, rng);
  } else if (m >= 2) {
    // Each accepted swap replaces two edges.
    const std::size_t swaps = (k + 1) / 2;
    const std::size_t max_attempts = 100 * swaps + 1000;
    std::size_t done = 0;
    for (std::size_t attempt = 0; done < swaps && attempt < max_attempts; ++attempt) {
      std::uniform_int_distribution<std::size_t> pick(0, bag.size() - 1);
      std::size_t i = pick(rng), j = pick(rng);
      if (i == j) continue;
      Edge a = bag.edges()[i], b = bag.edges()[j];
      if (std::bernoulli_distribution(0.5)(rng)) std::swap(b.u, b.v);
      // (a.u,a.v),(b.u,b.v) -> (a.u,b.v),(b.u,a.v)
      if (a.u == b.v || b.u == a.v) continue;
      if (bag.contains(a.u, b.v) || bag.contains(b.u, a.v)) continue;
      bag.erase_at(std::max(i, j));
      bag.erase_at(std::min(i, j));
      bag.insert(a.u, b.v);
      bag.insert(b.u, a.v);
      ++done;
    }
  }

  NoisePair out;
  out.original = g;
  out.noisy = Graph::from_edges(n, bag.edges(), g.labels());
  out.noise_pct = noise_pct;
  out.seed = seed;
  out.true_mapping.resize(n);
  for (NodeId u = 0; u < n; ++u) out.true_mapping[u] = u;
  return out;
}

}  // namespace gdvalign
