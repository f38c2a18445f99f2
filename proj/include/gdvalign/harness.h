#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gdvalign/aligners.h"
#include "gdvalign/embedding.h"
#include "gdvalign/generators.h"
#include "gdvalign/graph.h"

namespace gdvalign {

struct NetworkSpec {
  std::string name;
  std::string network_class = "synthetic";  // selects SA settings
  // Exactly one source: a generator (model non-empty) or an edge-list path.
  std::string model;  // "geo" or "sf"
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<std::uint64_t> seed;  // defaults to derive_seed(master, name)
  std::string edge_list;
};

struct MethodSpec {
  std::string name;
  FeatureSource kind = FeatureSource::kGraphletPca;
  PcaOptions pca;
  // For external methods: path with {network}, {noise} and {instance}
  // placeholders, one similarity file per cell (rows: original, cols: noisy).
  std::string path_template;
};

struct SaSettings {
  double time_s = 300.0;
  std::optional<std::uint64_t> moves;
  SaInit init = SaInit::kRandom;
};

struct ExperimentConfig {
  std::vector<NetworkSpec> networks;
  std::vector<int> noise_levels{0, 10, 25, 50, 75, 100};
  int instances_per_level = 5;
  std::vector<MethodSpec> methods;
  std::vector<std::string> aligners{"wave", "sa"};
  std::map<std::string, SaSettings> sa_by_class;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
  RewireMode rewire_mode = RewireMode::kRemoveAdd;
  WaveOptions wave;
  std::string output_dir = "results";

  // Throws ConfigError.
  void validate() const;
  const SaSettings &sa_for(const std::string &network_class) const;
};

// YAML schema documented in README.md. Throws ConfigError.
ExperimentConfig parse_config(const std::string &yaml_text);
ExperimentConfig load_config(const std::string &path);

struct ExperimentRecord {
  std::string method;
  std::string aligner;
  std::string network;
  int noise_pct = 0;
  int instance = 0;
  std::uint64_t seed = 0;
  double node_correctness = 0.0;
  double s3 = 0.0;
  double embed_real_s = 0.0;
  double embed_cpu_s = 0.0;
  double align_real_s = 0.0;

  std::string key() const;
};

struct Runtime {
  double real_s = 0.0;
  double cpu_s = 0.0;
};

// Wall-clock and process CPU time of `work`.
Runtime measure_runtime(const std::function<void()> &work);
// Same for graphlet counting of one network (loading excluded).
Runtime measure_graphlet_runtime(const Graph &g);

std::string cell_path(const std::string &path_template, const std::string &network, int noise_pct,
                      int instance);

// Writes the noisy counterpart of every cell as an edge list under `dir`
// ({network}_{noise}_{instance}.txt) so external embeddings can be computed.
void export_noisy_pairs(const ExperimentConfig &cfg, const std::string &dir);

struct BenchmarkPaths {
  std::string records;   // deterministic metrics, append-only
  std::string timings;   // runtimes, kept apart so records stay bit-reproducible
  std::string summary;   // per-cell means
  std::string manifest;  // config + seed + version
};

BenchmarkPaths default_paths(const std::string &output_dir);

// Runs every missing (network, noise, instance, method, aligner) cell and
// returns all records of the grid in grid order. Cells already present in the
// records file are skipped.
std::vector<ExperimentRecord> run_benchmark(
    const ExperimentConfig &cfg, const BenchmarkPaths &paths,
    const std::function<void(const ExperimentRecord &)> &on_record = {});

void write_records_header(std::ostream &out);
void write_record(const ExperimentRecord &r, std::ostream &out);
// Reads the records CSV (and merges a timings CSV when given). Throws FormatError.
std::vector<ExperimentRecord> read_records(std::istream &records, std::istream *timings = nullptr);
std::vector<ExperimentRecord> read_records_file(const std::string &path);

struct CellMean {
  std::string method;
  std::string aligner;
  std::string network;
  int noise_pct = 0;
  std::size_t instances = 0;
  bool complete = true;
  double mean_nc = 0.0;
  double mean_s3 = 0.0;
};

// Means per (method, aligner, network, noise) in first-appearance order. A
// cell with fewer than expected_instances records is flagged incomplete.
std::vector<CellMean> aggregate(const std::vector<ExperimentRecord> &records,
                                std::size_t expected_instances = 0);
void write_summary(const std::vector<CellMean> &cells, std::ostream &out);

struct RankTable {
  std::vector<std::string> methods;
  std::size_t scored_cells = 0;
  std::size_t excluded_cells = 0;
  // counts[method][rank - 1]
  std::map<std::string, std::vector<std::size_t>> counts;
  // Cells where the method is the only rank-1 method.
  std::map<std::string, std::size_t> sole_best;
  // Rank-1 ties keyed by the tied methods joined with '+'.
  std::map<std::string, std::size_t> ties;
  std::vector<std::string> warnings;

  double percent(const std::string &method, int rank) const;
  double sole_best_percent(const std::string &method) const;
  double tie_percent(const std::string &group) const;
};

// Competition ranking per (aligner, network, noise <= max_noise) cell by mean
// node correctness: rank = 1 + number of methods better by more than
// tie_epsilon. Cells lacking any method are excluded with a warning.
RankTable rank_methods(const std::vector<CellMean> &cells, double tie_epsilon = 0.005,
                       int max_noise = 50);
void write_rank_table(const RankTable &table, std::ostream &out);

}  // namespace gdvalign
