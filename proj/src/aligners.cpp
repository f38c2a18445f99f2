#include "gdvalign/aligners.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>

#include "adjacency.h"
#include "gdvalign/errors.h"
#include "gdvalign/generators.h"

namespace gdvalign {

namespace {

constexpr NodeId kNone = std::numeric_limits<NodeId>::max();

// Inputs arranged so that `src` is the smaller graph.
struct Oriented {
  const Graph *src = nullptr;
  const Graph *dst = nullptr;
  const SimilarityMatrix *given = nullptr;
  SimilarityMatrix transposed;
  bool swapped = false;

  const SimilarityMatrix &sim() const { return swapped ? transposed : *given; }
};

Oriented orient(const Graph &g1, const Graph &g2, const SimilarityMatrix &sim) {
  if (sim.rows() != g1.num_nodes() || sim.cols() != g2.num_nodes())
    throw ParameterError("similarity matrix is " + std::to_string(sim.rows()) + "x" +
                         std::to_string(sim.cols()) + " but graphs have " +
                         std::to_string(g1.num_nodes()) + " and " +
                         std::to_string(g2.num_nodes()) + " nodes");
  Oriented o;
  o.given = &sim;
  if (g1.num_nodes() <= g2.num_nodes()) {
    o.src = &g1;
    o.dst = &g2;
  } else {
    o.src = &g2;
    o.dst = &g1;
    o.transposed = sim.transposed();
    o.swapped = true;
  }
  if (o.src->num_nodes() == 0) throw ParameterError("cannot align an empty graph");
  return o;
}

}  // namespace

void validate_alignment(const Graph &g1, const Graph &g2, const Alignment &a) {
  const Graph &src = a.swapped ? g2 : g1;
  const Graph &dst = a.swapped ? g1 : g2;
  if (a.mapping.size() != src.num_nodes())
    throw ParameterError("alignment is not total: " + std::to_string(a.mapping.size()) +
                         " of " + std::to_string(src.num_nodes()) + " nodes mapped");
  std::vector<char> hit(dst.num_nodes(), 0);
  for (NodeId v : a.mapping) {
    if (v >= dst.num_nodes()) throw ParameterError("alignment image out of range");
    if (hit[v]) throw ParameterError("alignment is not injective");
    hit[v] = 1;
  }
}

double s3_score(const Graph &g1, const Graph &g2, const Alignment &a) {
  const Graph &src = a.swapped ? g2 : g1;
  const Graph &dst = a.swapped ? g1 : g2;
  std::size_t conserved = 0;
  for (const Edge &e : src.edges())
    if (dst.has_edge(a.mapping[e.u], a.mapping[e.v])) ++conserved;
  std::vector<char> in_image(dst.num_nodes(), 0);
  for (NodeId v : a.mapping) in_image[v] = 1;
  std::size_t induced = 0;
  for (const Edge &e : dst.edges())
    if (in_image[e.u] && in_image[e.v]) ++induced;
  const std::size_t denom = src.num_edges() + induced - conserved;
  return denom == 0 ? 0.0 : double(conserved) / double(denom);
}

double esim_score(const SimilarityMatrix &sim, const Alignment &a) {
  if (a.mapping.empty()) return 0.0;
  double total = 0.0;
  for (NodeId u = 0; u < a.mapping.size(); ++u)
    total += a.swapped ? sim(a.mapping[u], u) : sim(u, a.mapping[u]);
  return total / double(a.mapping.size());
}

double node_correctness(const Alignment &a, const std::vector<NodeId> &truth) {
  if (truth.size() != a.mapping.size())
    throw ParameterError("true mapping does not cover the aligned nodes");
  if (truth.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t u = 0; u < truth.size(); ++u)
    if (a.mapping[u] == truth[u]) ++correct;
  return double(correct) / double(truth.size());
}

// --- seed and extend ----------------------------------------------------------

namespace {

struct Candidate {
  double score;
  NodeId p;
  NodeId q;
};

// Max-heap order: higher score first, then smaller p, then smaller q.
struct CandidateOrder {
  bool operator()(const Candidate &a, const Candidate &b) const {
    if (a.score != b.score) return a.score < b.score;
    if (a.p != b.p) return a.p > b.p;
    return a.q > b.q;
  }
};

}  // namespace

Alignment wave_align(const Graph &g1, const Graph &g2, const SimilarityMatrix &sim_in,
                     const WaveOptions &options) {
  Oriented o = orient(g1, g2, sim_in);
  const Graph &src = *o.src;
  const Graph &dst = *o.dst;
  const SimilarityMatrix &sim = o.sim();
  const std::size_t n1 = src.num_nodes(), n2 = dst.num_nodes();

  std::vector<NodeId> image(n1, kNone);
  std::vector<char> used(n2, 0);
  std::unordered_map<std::uint64_t, std::uint32_t> votes;
  std::priority_queue<Candidate, std::vector<Candidate>, CandidateOrder> frontier;

  auto score_of = [&](NodeId p, NodeId q, std::uint32_t v) {
    return options.use_votes ? sim(p, q) * (1.0 + double(v)) : sim(p, q);
  };

  auto align = [&](NodeId u, NodeId v) {
    image[u] = v;
    used[v] = 1;
    for (NodeId p : src.neighbors(u)) {
      if (image[p] != kNone) continue;
      for (NodeId q : dst.neighbors(v)) {
        // Dissimilar pairs never extend; they can still be matched by reseeding.
        if (used[q] || !(sim(p, q) > 0.0)) continue;
        std::uint32_t &count = votes[std::uint64_t(p) * n2 + q];
        ++count;
        frontier.push({score_of(p, q, count), p, q});
      }
    }
  };

  // Best unused partner per row, invalidated lazily once its column is taken.
  std::vector<NodeId> row_best(n1, kNone);
  auto reseed = [&]() {
    Candidate best{-1.0, kNone, kNone};
    for (NodeId p = 0; p < n1; ++p) {
      if (image[p] != kNone) continue;
      if (row_best[p] == kNone || used[row_best[p]]) {
        NodeId arg = kNone;
        for (NodeId q = 0; q < n2; ++q)
          if (!used[q] && (arg == kNone || sim(p, q) > sim(p, arg))) arg = q;
        row_best[p] = arg;
      }
      const double s = sim(p, row_best[p]);
      if (s > best.score) best = {s, p, row_best[p]};
    }
    align(best.p, best.q);
  };

  std::size_t aligned = 0;
  while (aligned < n1) {
    bool extended = false;
    while (!frontier.empty()) {
      Candidate c = frontier.top();
      frontier.pop();
      if (image[c.p] != kNone || used[c.q]) continue;
      auto it = votes.find(std::uint64_t(c.p) * n2 + c.q);
      // Stale entry: a newer push for this pair carries the current score.
      if (c.score != score_of(c.p, c.q, it->second)) continue;
      align(c.p, c.q);
      extended = true;
      break;
    }
    if (!extended) reseed();
    ++aligned;
  }

  return Alignment{std::move(image), o.swapped};
}

// --- simulated annealing ------------------------------------------------------

void SaConfig::validate() const {
  if (!(w_s3 >= 0.0) || !(w_esim >= 0.0) || w_s3 + w_esim <= 0.0)
    throw ParameterError("objective weights must be non-negative and not both zero");
  if (move_budget) {
    if (*move_budget == 0) throw ParameterError("move budget must be positive");
  } else if (!(time_budget_s > 0.0)) {
    throw ParameterError("time budget must be positive");
  }
  if (t0 && !(*t0 > 0.0)) throw ParameterError("t0 must be positive");
  if (t_final && !(*t_final > 0.0)) throw ParameterError("t_final must be positive");
}

double sa_objective(const Graph &g1, const Graph &g2, const SimilarityMatrix &sim,
                    const Alignment &a, double w_s3, double w_esim) {
  return (w_s3 * s3_score(g1, g2, a) + w_esim * esim_score(sim, a)) / (w_s3 + w_esim);
}

namespace {

struct Delta {
  std::int64_t conserved = 0;
  std::int64_t induced = 0;
  double esim = 0.0;
};

// Incremental bookkeeping of conserved edges, induced image edges and summed
// similarity for one annealing run.
class SaState {
 public:
  SaState(const Graph &src, const Graph &dst, const SimilarityMatrix &sim,
          const detail::AdjacencyTest &dst_adj, double w_s3, double w_esim)
      : src_(src), dst_(dst), sim_(sim), adj_(dst_adj), w_s3_(w_s3), w_esim_(w_esim) {}

  void reset(std::vector<NodeId> mapping) {
    mapping_ = std::move(mapping);
    owner_.assign(dst_.num_nodes(), kNone);
    for (NodeId u = 0; u < mapping_.size(); ++u) owner_[mapping_[u]] = u;
    unused_.clear();
    unused_pos_.assign(dst_.num_nodes(), kNone);
    for (NodeId v = 0; v < dst_.num_nodes(); ++v)
      if (owner_[v] == kNone) {
        unused_pos_[v] = static_cast<NodeId>(unused_.size());
        unused_.push_back(v);
      }
    conserved_ = 0;
    esim_sum_ = 0.0;
    for (const Edge &e : src_.edges())
      if (adj_(mapping_[e.u], mapping_[e.v])) ++conserved_;
    induced_ = 0;
    for (const Edge &e : dst_.edges())
      if (owner_[e.u] != kNone && owner_[e.v] != kNone) ++induced_;
    for (NodeId u = 0; u < mapping_.size(); ++u) esim_sum_ += sim_(u, mapping_[u]);
  }

  double objective() const { return objective_at(conserved_, induced_, esim_sum_); }

  double objective_after(const Delta &d) const {
    return objective_at(conserved_ + d.conserved, induced_ + d.induced, esim_sum_ + d.esim);
  }

  // Reassign p to the unused node `to`.
  Delta delta_change(NodeId p, NodeId to) const {
    const NodeId from = mapping_[p];
    Delta d;
    for (NodeId w : src_.neighbors(p)) {
      const NodeId img = mapping_[w];
      d.conserved += int(adj_(to, img)) - int(adj_(from, img));
    }
    for (NodeId x : dst_.neighbors(from))
      if (owner_[x] != kNone) --d.induced;
    for (NodeId x : dst_.neighbors(to))
      if (owner_[x] != kNone && x != from) ++d.induced;
    d.esim = sim_(p, to) - sim_(p, from);
    return d;
  }

  Delta delta_swap(NodeId p1, NodeId p2) const {
    const NodeId v1 = mapping_[p1], v2 = mapping_[p2];
    Delta d;
    for (NodeId w : src_.neighbors(p1)) {
      if (w == p2) continue;
      const NodeId img = mapping_[w];
      d.conserved += int(adj_(v2, img)) - int(adj_(v1, img));
    }
    for (NodeId w : src_.neighbors(p2)) {
      if (w == p1) continue;
      const NodeId img = mapping_[w];
      d.conserved += int(adj_(v1, img)) - int(adj_(v2, img));
    }
    d.esim = sim_(p1, v2) + sim_(p2, v1) - sim_(p1, v1) - sim_(p2, v2);
    return d;
  }

  void apply_change(NodeId p, NodeId to, const Delta &d) {
    const NodeId from = mapping_[p];
    const NodeId slot = unused_pos_[to];
    unused_[slot] = from;
    unused_pos_[from] = slot;
    unused_pos_[to] = kNone;
    owner_[from] = kNone;
    owner_[to] = p;
    mapping_[p] = to;
    apply(d);
  }

  void apply_swap(NodeId p1, NodeId p2, const Delta &d) {
    std::swap(mapping_[p1], mapping_[p2]);
    owner_[mapping_[p1]] = p1;
    owner_[mapping_[p2]] = p2;
    apply(d);
  }

  const std::vector<NodeId> &mapping() const { return mapping_; }
  const std::vector<NodeId> &unused() const { return unused_; }

 private:
  double objective_at(std::int64_t conserved, std::int64_t induced, double esim_sum) const {
    const std::int64_t denom = std::int64_t(src_.num_edges()) + induced - conserved;
    const double s3 = denom > 0 ? double(conserved) / double(denom) : 0.0;
    const double esim = esim_sum / double(mapping_.size());
    return (w_s3_ * s3 + w_esim_ * esim) / (w_s3_ + w_esim_);
  }

  void apply(const Delta &d) {
    conserved_ += d.conserved;
    induced_ += d.induced;
    esim_sum_ += d.esim;
  }

  const Graph &src_;
  const Graph &dst_;
  const SimilarityMatrix &sim_;
  const detail::AdjacencyTest &adj_;
  double w_s3_, w_esim_;

  std::vector<NodeId> mapping_;
  std::vector<NodeId> owner_;
  std::vector<NodeId> unused_;
  std::vector<NodeId> unused_pos_;
  std::int64_t conserved_ = 0;
  std::int64_t induced_ = 0;
  double esim_sum_ = 0.0;
};

std::vector<NodeId> random_injection(std::size_t n1, std::size_t n2, Rng &rng) {
  std::vector<NodeId> perm(n2);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  for (std::size_t i = 0; i < n1; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n2 - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  perm.resize(n1);
  return perm;
}

// Rows in order of their best similarity take their best free partner.
std::vector<NodeId> greedy_injection(const SimilarityMatrix &sim) {
  const std::size_t n1 = sim.rows(), n2 = sim.cols();
  std::vector<double> row_max(n1, 0.0);
  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t q = 0; q < n2; ++q) row_max[p] = std::max(row_max[p], sim(p, q));
  std::vector<NodeId> order(n1);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return row_max[a] > row_max[b]; });
  std::vector<NodeId> mapping(n1, kNone);
  std::vector<char> used(n2, 0);
  for (NodeId p : order) {
    NodeId arg = kNone;
    for (NodeId q = 0; q < n2; ++q)
      if (!used[q] && (arg == kNone || sim(p, q) > sim(p, arg))) arg = q;
    mapping[p] = arg;
    used[arg] = 1;
  }
  return mapping;
}

enum class MoveKind { kNone, kChange, kSwap };

struct Move {
  MoveKind kind = MoveKind::kNone;
  NodeId a = 0;
  NodeId b = 0;
};

Move random_move(const SaState &state, std::size_t n1, Rng &rng) {
  const bool can_change = !state.unused().empty();
  const bool can_swap = n1 >= 2;
  if (!can_change && !can_swap) return {};
  bool change = can_change && (!can_swap || std::bernoulli_distribution(0.5)(rng));
  std::uniform_int_distribution<NodeId> pick_src(0, static_cast<NodeId>(n1 - 1));
  if (change) {
    NodeId p = pick_src(rng);
    const auto &unused = state.unused();
    NodeId to = unused[std::uniform_int_distribution<std::size_t>(0, unused.size() - 1)(rng)];
    return {MoveKind::kChange, p, to};
  }
  NodeId p1 = pick_src(rng);
  NodeId p2 = pick_src(rng);
  while (p2 == p1) p2 = pick_src(rng);
  return {MoveKind::kSwap, p1, p2};
}

Delta delta_of(const SaState &state, const Move &m) {
  return m.kind == MoveKind::kChange ? state.delta_change(m.a, m.b) : state.delta_swap(m.a, m.b);
}

constexpr int kCalibrationMoves = 1000;

}  // namespace

SaResult sa_align(const Graph &g1, const Graph &g2, const SimilarityMatrix &sim_in,
                  const SaConfig &cfg) {
  cfg.validate();
  Oriented o = orient(g1, g2, sim_in);
  const Graph &src = *o.src;
  const Graph &dst = *o.dst;
  const SimilarityMatrix &sim = o.sim();
  const std::size_t n1 = src.num_nodes(), n2 = dst.num_nodes();

  detail::AdjacencyTest dst_adj(dst);
  Rng rng(cfg.seed);
  SaState state(src, dst, sim, dst_adj, cfg.w_s3, cfg.w_esim);

  SaResult result;

  // Temperature calibration on a random injection: the mean loss of a
  // worsening move should be accepted with probability 0.99 at the start and
  // 1e-6 at the end.
  double t0 = 0.0, t_final = 0.0;
  {
    double worse_sum = 0.0;
    int worse = 0;
    if (!cfg.t0 || !cfg.t_final) {
      state.reset(random_injection(n1, n2, rng));
      const double f = state.objective();
      for (int i = 0; i < kCalibrationMoves; ++i) {
        Move m = random_move(state, n1, rng);
        if (m.kind == MoveKind::kNone) break;
        double df = state.objective_after(delta_of(state, m)) - f;
        if (df < 0) {
          worse_sum -= df;
          ++worse;
        }
      }
    }
    const double typical = worse > 0 ? worse_sum / worse : 1e-6;
    t0 = cfg.t0.value_or(typical / -std::log(0.99));
    t_final = cfg.t_final.value_or(typical / -std::log(1e-6));
  }
  result.t0 = t0;
  result.t_final = t_final;

  switch (cfg.init) {
    case SaInit::kRandom:
      state.reset(random_injection(n1, n2, rng));
      break;
    case SaInit::kGreedy:
      state.reset(greedy_injection(sim));
      break;
    case SaInit::kGiven: {
      Alignment given{cfg.initial_mapping, o.swapped};
      validate_alignment(g1, g2, given);
      state.reset(cfg.initial_mapping);
      break;
    }
  }

  double current = state.objective();
  double best = current;
  std::vector<NodeId> best_mapping = state.mapping();

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const double log_ratio = std::log(t_final / t0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double temperature = t0;
  std::uint64_t moves = 0;

  for (;;) {
    if ((moves & 1023) == 0) {
      double progress;
      if (cfg.move_budget) {
        progress = double(moves) / double(*cfg.move_budget);
      } else {
        progress = std::chrono::duration<double>(Clock::now() - start).count() / cfg.time_budget_s;
      }
      if (progress >= 1.0) break;
      temperature = t0 * std::exp(log_ratio * progress);
    }
    if (cfg.move_budget && moves >= *cfg.move_budget) break;

    Move m = random_move(state, n1, rng);
    ++moves;
    if (m.kind != MoveKind::kNone) {
      Delta d = delta_of(state, m);
      const double next = state.objective_after(d);
      const double df = next - current;
      if (df >= 0.0 || unit(rng) < std::exp(df / temperature)) {
        if (m.kind == MoveKind::kChange) state.apply_change(m.a, m.b, d);
        else state.apply_swap(m.a, m.b, d);
        current = next;
        if (current > best) {
          best = current;
          best_mapping = state.mapping();
        }
      }
    }
    if (cfg.trace_stride && moves % cfg.trace_stride == 0) result.best_trace.push_back(best);
  }

  result.alignment = Alignment{std::move(best_mapping), o.swapped};
  result.moves = moves;
  result.s3 = s3_score(g1, g2, result.alignment);
  result.esim = esim_score(sim_in, result.alignment);
  result.objective = (cfg.w_s3 * result.s3 + cfg.w_esim * result.esim) / (cfg.w_s3 + cfg.w_esim);
  return result;
}

// --- alignment files ----------------------------------------------------------

void write_alignment(const Graph &g1, const Graph &g2, const Alignment &a, std::ostream &out) {
  const Graph &src = a.swapped ? g2 : g1;
  const Graph &dst = a.swapped ? g1 : g2;
  for (NodeId u = 0; u < a.mapping.size(); ++u)
    out << src.label(u) << '\t' << dst.label(a.mapping[u]) << '\n';
}

std::vector<LabelPair> read_label_pairs(std::istream &in) {
  std::vector<LabelPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    LabelPair p;
    if (!(row >> p.first >> p.second)) throw FormatError("expected two labels", line_no);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<LabelPair> read_label_pairs(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_label_pairs(in);
}

}  // namespace gdvalign
