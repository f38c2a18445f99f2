// gdvalign command-line interface.
//
// Exit codes: 0 success, 2 configuration/argument error, 3 input-format error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include <CLI11.hpp>

#include "gdvalign/aligners.h"
#include "gdvalign/embedding.h"
#include "gdvalign/errors.h"
#include "gdvalign/generators.h"
#include "gdvalign/graph.h"
#include "gdvalign/graphlets.h"
#include "gdvalign/harness.h"
#include "gdvalign/version.h"

namespace {

using namespace gdvalign;

constexpr int kExitConfig = 2;
constexpr int kExitFormat = 3;

std::ifstream open_in(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return in;
}

// Writes to `path`, or stdout when path is empty or "-".
template <typename Fn>
void with_output(const std::string &path, Fn &&fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  fn(out);
}

Graph load_graph(const std::string &path) {
  auto in = open_in(path);
  ParsedEdgeList parsed = parse_edge_list(in);
  if (parsed.self_loops > 0)
    std::cerr << "warning: " << path << ": dropped " << parsed.self_loops << " self-loop(s)\n";
  return std::move(parsed.graph);
}

bool looks_like_gdv(const std::string &path) {
  auto in = open_in(path);
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::string token;
    int count = 0;
    bool numeric = true;
    row >> token;
    while (row >> token) {
      ++count;
      numeric = numeric && token.find_first_not_of("0123456789") == std::string::npos;
    }
    return count == int(kNumOrbits) && numeric;
  }
  return false;
}

LabeledGdv load_gdv_input(const std::string &path, const std::string &kind) {
  const bool gdv = kind == "gdv" || (kind == "auto" && looks_like_gdv(path));
  if (gdv) {
    auto in = open_in(path);
    return read_gdv(in);
  }
  Graph g = load_graph(path);
  return LabeledGdv{g.labels(), count_orbits(g)};
}

std::unordered_map<std::string, std::string> to_map(const std::vector<LabelPair> &pairs) {
  std::unordered_map<std::string, std::string> m;
  for (const auto &p : pairs) m.emplace(p.first, p.second);
  return m;
}

int run(int argc, char **argv) {
  CLI::App app{"Graphlet-based network embedding and alignment toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // generate
  auto *gen = app.add_subcommand("generate", "Generate a synthetic network as an edge list");
  std::string gen_model = "geo", gen_out;
  std::size_t gen_n = 1000, gen_m = 6000;
  std::uint64_t gen_seed = 0;
  gen->add_option("--model", gen_model, "geo or sf")->check(CLI::IsMember({"geo", "sf"}));
  gen->add_option("-n,--nodes", gen_n, "Node count");
  gen->add_option("-m,--edges", gen_m, "Edge count");
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("-o,--output", gen_out, "Output edge list (default stdout)");

  // rewire
  auto *rew = app.add_subcommand("rewire", "Create a noisy counterpart by rewiring edges");
  std::string rew_in, rew_out, rew_map, rew_mode = "remove-add";
  int rew_pct = 0;
  std::uint64_t rew_seed = 0;
  rew->add_option("input", rew_in, "Edge list")->required();
  rew->add_option("--pct", rew_pct, "Percent of edges to rewire")->required()->check(CLI::Range(0, 100));
  rew->add_option("--seed", rew_seed, "Random seed");
  rew->add_option("--mode", rew_mode, "remove-add or degree-preserving")
      ->check(CLI::IsMember({"remove-add", "degree-preserving"}));
  rew->add_option("-o,--output", rew_out, "Noisy edge list (default stdout)");
  rew->add_option("--mapping", rew_map, "True node mapping output (label TAB label)");

  // gdv
  auto *gdv = app.add_subcommand("gdv", "Count graphlet degree vectors");
  std::string gdv_in, gdv_out;
  unsigned gdv_threads = 1;
  bool gdv_timing = false;
  gdv->add_option("input", gdv_in, "Edge list")->required();
  gdv->add_option("-o,--output", gdv_out, "GDV file (default stdout)");
  gdv->add_option("--threads", gdv_threads, "Worker threads")->check(CLI::PositiveNumber);
  gdv->add_flag("--timing", gdv_timing, "Report real and CPU seconds on stderr");

  // sim
  auto *sim = app.add_subcommand("sim", "Node similarities from GDVs via PCA and cosine");
  std::string sim_a, sim_b, sim_out, sim_from = "auto";
  double sim_var = 0.90;
  int sim_min = 2;
  bool sim_log = false;
  sim->add_option("first", sim_a, "GDV file or edge list of the first network")->required();
  sim->add_option("second", sim_b, "GDV file or edge list of the second network")->required();
  sim->add_option("--from", sim_from, "Input kind")->check(CLI::IsMember({"auto", "gdv", "edges"}));
  sim->add_option("--pca-variance", sim_var, "Explained-variance threshold")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--min-components", sim_min, "Minimum principal components")->check(CLI::Range(1, 15));
  sim->add_flag("--log-transform", sim_log, "Apply log(1+x) to counts before PCA");
  sim->add_option("-o,--output", sim_out, "Similarity file (default stdout)");

  // align
  auto *aln = app.add_subcommand("align", "Align two networks given node similarities");
  std::string aln_g1, aln_g2, aln_sim, aln_out, aln_strategy = "wave", aln_init = "random";
  double aln_s3 = 1.0, aln_esim = 1.0, aln_time = 300.0;
  std::uint64_t aln_seed = 0, aln_moves = 0;
  bool aln_no_votes = false;
  aln->add_option("g1", aln_g1, "First edge list")->required();
  aln->add_option("g2", aln_g2, "Second edge list")->required();
  aln->add_option("similarity", aln_sim, "Similarity file (label1 label2 value)")->required();
  aln->add_option("--strategy", aln_strategy, "wave or sa")->check(CLI::IsMember({"wave", "sa"}));
  aln->add_option("--s3-weight", aln_s3, "S3 weight (sa)")->check(CLI::NonNegativeNumber);
  aln->add_option("--esim-weight", aln_esim, "Similarity weight (sa)")->check(CLI::NonNegativeNumber);
  aln->add_option("--time", aln_time, "Time budget in seconds (sa)");
  aln->add_option("--moves", aln_moves, "Move budget; overrides --time (sa)");
  aln->add_option("--seed", aln_seed, "Random seed (sa)");
  aln->add_option("--init", aln_init, "Initial alignment (sa)")->check(CLI::IsMember({"random", "greedy"}));
  aln->add_flag("--no-votes", aln_no_votes, "Rank wave candidates by similarity only");
  aln->add_option("-o,--output", aln_out, "Alignment file (default stdout)");

  // eval
  auto *ev = app.add_subcommand("eval", "Node correctness and S3 of an alignment");
  std::string ev_aln, ev_truth, ev_g1, ev_g2;
  ev->add_option("alignment", ev_aln, "Alignment file")->required();
  ev->add_option("truth", ev_truth, "True mapping file")->required();
  ev->add_option("--g1", ev_g1, "First edge list (enables S3)");
  ev->add_option("--g2", ev_g2, "Second edge list (enables S3)");

  // benchmark
  auto *bench = app.add_subcommand("benchmark", "Run the noise-robustness benchmark grid");
  std::string bench_cfg, bench_export;
  unsigned bench_workers = 0;
  bench->add_option("config", bench_cfg, "YAML config")->required();
  bench->add_option("--workers", bench_workers, "Override worker count");
  bench->add_option("--export-pairs", bench_export,
                    "Only write every cell's noisy network to this directory");

  // rank
  auto *rank = app.add_subcommand("rank", "Rank methods from a records CSV");
  std::string rank_in;
  double rank_eps = 0.005;
  int rank_max_noise = 50;
  rank->add_option("records", rank_in, "Records CSV")->required();
  rank->add_option("--epsilon", rank_eps, "Tie tolerance on mean node correctness");
  rank->add_option("--max-noise", rank_max_noise, "Highest noise level ranked");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*gen) {
    Graph g = gen_model == "geo" ? generate_geo(gen_n, gen_m, gen_seed)
                                 : generate_sf(gen_n, gen_m, gen_seed);
    with_output(gen_out, [&](std::ostream &o) { serialize_edge_list(g, o); });
  } else if (*rew) {
    Graph g = load_graph(rew_in);
    NoisePair pair = rewire(g, rew_pct, rew_seed,
                            rew_mode == "remove-add" ? RewireMode::kRemoveAdd
                                                     : RewireMode::kDegreePreserving);
    with_output(rew_out, [&](std::ostream &o) { serialize_edge_list(pair.noisy, o); });
    if (!rew_map.empty())
      with_output(rew_map, [&](std::ostream &o) {
        for (NodeId u = 0; u < g.num_nodes(); ++u)
          o << g.label(u) << '\t' << pair.noisy.label(pair.true_mapping[u]) << '\n';
      });
  } else if (*gdv) {
    Graph g = load_graph(gdv_in);
    GdvMatrix counts;
    Runtime rt = measure_runtime([&] { counts = count_orbits(g, gdv_threads); });
    with_output(gdv_out, [&](std::ostream &o) { write_gdv(g, counts, o); });
    if (gdv_timing)
      std::cerr << "real_s=" << format_double(rt.real_s) << " cpu_s=" << format_double(rt.cpu_s)
                << '\n';
  } else if (*sim) {
    LabeledGdv a = load_gdv_input(sim_a, sim_from);
    LabeledGdv b = load_gdv_input(sim_b, sim_from);
    PcaOptions opts{sim_var, sim_min, sim_log};
    PcaResult pca;
    SimilarityMatrix s = graphlet_similarity(a, b, opts, &pca);
    std::cerr << "components=" << pca.components
              << " explained_variance=" << format_double(pca.explained_variance) << '\n';
    with_output(sim_out, [&](std::ostream &o) { write_similarity(s, o); });
  } else if (*aln) {
    Graph g1 = load_graph(aln_g1);
    Graph g2 = load_graph(aln_g2);
    auto in = open_in(aln_sim);
    SimilarityMatrix s = read_similarity(in, &g1.labels(), &g2.labels());
    Alignment a;
    if (aln_strategy == "wave") {
      a = wave_align(g1, g2, s, WaveOptions{!aln_no_votes});
    } else {
      SaConfig cfg;
      cfg.w_s3 = aln_s3;
      cfg.w_esim = aln_esim;
      cfg.time_budget_s = aln_time;
      if (aln_moves > 0) cfg.move_budget = aln_moves;
      cfg.seed = aln_seed;
      cfg.init = aln_init == "greedy" ? SaInit::kGreedy : SaInit::kRandom;
      SaResult r = sa_align(g1, g2, s, cfg);
      std::cerr << "objective=" << format_double(r.objective) << " s3=" << format_double(r.s3)
                << " esim=" << format_double(r.esim) << " moves=" << r.moves << '\n';
      a = std::move(r.alignment);
    }
    with_output(aln_out, [&](std::ostream &o) { write_alignment(g1, g2, a, o); });
  } else if (*ev) {
    auto ain = open_in(ev_aln);
    auto tin = open_in(ev_truth);
    std::vector<LabelPair> pairs = read_label_pairs(ain);
    std::vector<LabelPair> truth = read_label_pairs(tin);
    auto forward = to_map(truth);
    std::vector<LabelPair> flipped;
    for (const auto &p : truth) flipped.push_back({p.second, p.first});
    auto backward = to_map(flipped);
    // The alignment's first column names the smaller graph, which may be
    // either side of the true mapping.
    std::size_t fwd_hits = 0, bwd_hits = 0;
    for (const auto &p : pairs) {
      if (forward.count(p.first)) ++fwd_hits;
      if (backward.count(p.first)) ++bwd_hits;
    }
    const auto &truth_map = fwd_hits >= bwd_hits ? forward : backward;
    std::size_t correct = 0;
    for (const auto &p : pairs) {
      auto it = truth_map.find(p.first);
      if (it != truth_map.end() && it->second == p.second) ++correct;
    }
    const double nc = pairs.empty() ? 0.0 : double(correct) / double(pairs.size());
    std::cout << "node_correctness=" << format_double(nc) << '\n';
    if (!ev_g1.empty() && !ev_g2.empty()) {
      Graph g1 = load_graph(ev_g1);
      Graph g2 = load_graph(ev_g2);
      Alignment a;
      a.swapped = g1.num_nodes() > g2.num_nodes();
      const Graph &src = a.swapped ? g2 : g1;
      const Graph &dst = a.swapped ? g1 : g2;
      a.mapping.assign(src.num_nodes(), 0);
      std::vector<char> seen(src.num_nodes(), 0);
      for (const auto &p : pairs) {
        auto u = src.find(p.first);
        auto v = dst.find(p.second);
        if (!u || !v) throw FormatError("alignment label not found in graphs: " + p.first + " " + p.second);
        a.mapping[*u] = *v;
        seen[*u] = 1;
      }
      if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw FormatError("alignment does not cover every node of the smaller graph");
      validate_alignment(g1, g2, a);
      std::cout << "s3=" << format_double(s3_score(g1, g2, a)) << '\n';
    }
  } else if (*bench) {
    ExperimentConfig cfg = load_config(bench_cfg);
    if (bench_workers > 0) cfg.workers = bench_workers;
    if (!bench_export.empty()) {
      export_noisy_pairs(cfg, bench_export);
      return 0;
    }
    BenchmarkPaths paths = default_paths(cfg.output_dir);
    auto records = run_benchmark(cfg, paths, [](const ExperimentRecord &r) {
      std::cerr << r.method << ' ' << r.aligner << ' ' << r.network << " noise=" << r.noise_pct
                << " instance=" << r.instance << " nc=" << format_double(r.node_correctness)
                << '\n';
    });
    std::cerr << records.size() << " records in " << paths.records << '\n';
  } else if (*rank) {
    auto records = read_records_file(rank_in);
    RankTable table = rank_methods(aggregate(records), rank_eps, rank_max_noise);
    for (const auto &w : table.warnings) std::cerr << "warning: " << w << '\n';
    write_rank_table(table, std::cout);
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const gdvalign::FormatError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const gdvalign::DegenerateInputError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const gdvalign::ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const gdvalign::ParameterError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
}
