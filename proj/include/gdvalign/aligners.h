#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "gdvalign/embedding.h"
#include "gdvalign/graph.h"

namespace gdvalign {

// Injective total map from the smaller graph's nodes into the larger graph.
// When `swapped` is set the second input graph was the smaller one, so
// mapping runs from g2 into g1.
struct Alignment {
  std::vector<NodeId> mapping;
  bool swapped = false;

  friend bool operator==(const Alignment &, const Alignment &) = default;
};

// Throws ParameterError unless `a` is total and injective for (g1, g2).
void validate_alignment(const Graph &g1, const Graph &g2, const Alignment &a);

// Symmetric substructure score: conserved / (|E1| + |E2 induced on image| - conserved).
// Zero when both edge sets are empty.
double s3_score(const Graph &g1, const Graph &g2, const Alignment &a);

// Mean similarity over aligned pairs; sim is indexed (g1 node, g2 node).
double esim_score(const SimilarityMatrix &sim, const Alignment &a);

// Fraction of source nodes u with mapping[u] == truth[u].
double node_correctness(const Alignment &a, const std::vector<NodeId> &truth);

struct WaveOptions {
  // Scores candidates by similarity * (1 + votes); false ranks by similarity alone.
  bool use_votes = true;
};

// Seed-and-extend alignment. Deterministic.
Alignment wave_align(const Graph &g1, const Graph &g2, const SimilarityMatrix &sim,
                     const WaveOptions &options = {});

enum class SaInit { kRandom, kGreedy, kGiven };

struct SaConfig {
  double w_s3 = 1.0;
  double w_esim = 1.0;
  double time_budget_s = 300.0;
  // When set, the run lasts exactly this many moves and ignores the clock.
  std::optional<std::uint64_t> move_budget;
  std::uint64_t seed = 0;
  std::optional<double> t0;
  std::optional<double> t_final;
  SaInit init = SaInit::kRandom;
  // For SaInit::kGiven, indexed by the smaller graph's nodes.
  std::vector<NodeId> initial_mapping;
  // Record the best objective every `trace_stride` moves; 0 disables.
  std::uint64_t trace_stride = 0;

  void validate() const;
};

struct SaResult {
  Alignment alignment;
  double objective = 0.0;  // recomputed from scratch for the returned alignment
  double s3 = 0.0;
  double esim = 0.0;
  std::uint64_t moves = 0;
  double t0 = 0.0;
  double t_final = 0.0;
  std::vector<double> best_trace;
};

// (w_s3 * S3 + w_esim * ESIM) / (w_s3 + w_esim)
double sa_objective(const Graph &g1, const Graph &g2, const SimilarityMatrix &sim,
                    const Alignment &a, double w_s3, double w_esim);

// Simulated annealing over injections with change and swap moves, Metropolis
// acceptance, and geometric cooling. Returns the best alignment visited.
SaResult sa_align(const Graph &g1, const Graph &g2, const SimilarityMatrix &sim,
                  const SaConfig &cfg);

// "label_g1 TAB label_g2" per line, in source id order. The first column
// always names the smaller graph's nodes.
void write_alignment(const Graph &g1, const Graph &g2, const Alignment &a, std::ostream &out);

struct LabelPair {
  std::string first;
  std::string second;
};
std::vector<LabelPair> read_label_pairs(std::istream &in);
std::vector<LabelPair> read_label_pairs(std::string_view text);

}  // namespace gdvalign
