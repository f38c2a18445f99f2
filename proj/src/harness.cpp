#include "gdvalign/harness.h"

#include <time.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "gdvalign/errors.h"
#include "gdvalign/version.h"

namespace gdvalign {

namespace fs = std::filesystem;

// --- configuration ------------------------------------------------------------

namespace {

bool valid_name(const std::string &s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

void reject_unknown_keys(const YAML::Node &node, std::initializer_list<const char *> allowed,
                         const std::string &where) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto &kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char *a) { return key == a; }))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const YAML::Node &node, const char *key, const std::string &where) {
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception &) {
    throw ConfigError("invalid value for '" + std::string(key) + "' in " + where);
  }
}

SaInit parse_init(const std::string &s) {
  if (s == "random") return SaInit::kRandom;
  if (s == "greedy") return SaInit::kGreedy;
  throw ConfigError("unknown SA init '" + s + "' (expected random or greedy)");
}

SaSettings parse_sa_settings(const YAML::Node &node, const std::string &where) {
  reject_unknown_keys(node, {"time", "moves", "init"}, where);
  SaSettings s;
  if (node["time"]) s.time_s = get<double>(node, "time", where);
  if (node["moves"]) s.moves = get<std::uint64_t>(node, "moves", where);
  if (node["init"]) s.init = parse_init(get<std::string>(node, "init", where));
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string &yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception &e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root || !root.IsMap()) throw ConfigError("config must be a YAML mapping");
  reject_unknown_keys(root,
                      {"master_seed", "workers", "output_dir", "noise_levels",
                       "instances_per_level", "rewire_mode", "aligners", "wave", "sa", "methods",
                       "networks"},
                      "config");

  ExperimentConfig cfg;
  cfg.sa_by_class["synthetic"] = SaSettings{300.0, std::nullopt, SaInit::kRandom};
  cfg.sa_by_class["ppi"] = SaSettings{3600.0, std::nullopt, SaInit::kRandom};

  const std::string top = "config";
  if (root["master_seed"]) cfg.master_seed = get<std::uint64_t>(root, "master_seed", top);
  if (root["workers"]) cfg.workers = get<unsigned>(root, "workers", top);
  if (root["output_dir"]) cfg.output_dir = get<std::string>(root, "output_dir", top);
  if (root["noise_levels"]) cfg.noise_levels = get<std::vector<int>>(root, "noise_levels", top);
  if (root["instances_per_level"])
    cfg.instances_per_level = get<int>(root, "instances_per_level", top);
  if (root["rewire_mode"]) {
    auto mode = get<std::string>(root, "rewire_mode", top);
    if (mode == "remove-add") cfg.rewire_mode = RewireMode::kRemoveAdd;
    else if (mode == "degree-preserving") cfg.rewire_mode = RewireMode::kDegreePreserving;
    else throw ConfigError("unknown rewire_mode '" + mode + "'");
  }
  if (root["aligners"]) cfg.aligners = get<std::vector<std::string>>(root, "aligners", top);
  if (auto wave = root["wave"]) {
    reject_unknown_keys(wave, {"use_votes"}, "wave");
    if (wave["use_votes"]) cfg.wave.use_votes = get<bool>(wave, "use_votes", "wave");
  }
  if (auto sa = root["sa"]) {
    if (!sa.IsMap()) throw ConfigError("sa must map network classes to settings");
    for (const auto &kv : sa) {
      auto cls = kv.first.as<std::string>();
      cfg.sa_by_class[cls] = parse_sa_settings(kv.second, "sa." + cls);
    }
  }

  if (auto methods = root["methods"]) {
    if (!methods.IsSequence()) throw ConfigError("methods must be a list");
    for (const auto &node : methods) {
      reject_unknown_keys(node, {"name", "kind", "pca_variance", "min_components",
                                 "log_transform", "path"},
                          "methods");
      MethodSpec m;
      m.name = get<std::string>(node, "name", "methods");
      const std::string where = "method '" + m.name + "'";
      auto kind = node["kind"] ? get<std::string>(node, "kind", where) : "graphlet-pca";
      if (kind == "graphlet-pca") m.kind = FeatureSource::kGraphletPca;
      else if (kind == "external") m.kind = FeatureSource::kExternal;
      else throw ConfigError("unknown method kind '" + kind + "' in " + where);
      if (node["pca_variance"]) m.pca.variance_threshold = get<double>(node, "pca_variance", where);
      if (node["min_components"]) m.pca.min_components = get<int>(node, "min_components", where);
      if (node["log_transform"]) m.pca.log_transform = get<bool>(node, "log_transform", where);
      if (node["path"]) m.path_template = get<std::string>(node, "path", where);
      cfg.methods.push_back(std::move(m));
    }
  } else {
    cfg.methods.push_back(MethodSpec{"graphlets", FeatureSource::kGraphletPca, {}, {}});
  }

  if (auto networks = root["networks"]) {
    if (!networks.IsSequence()) throw ConfigError("networks must be a list");
    for (const auto &node : networks) {
      reject_unknown_keys(node, {"name", "class", "model", "n", "m", "seed", "edge_list"},
                          "networks");
      NetworkSpec s;
      s.name = get<std::string>(node, "name", "networks");
      const std::string where = "network '" + s.name + "'";
      if (node["model"]) {
        s.model = get<std::string>(node, "model", where);
        s.n = get<std::size_t>(node, "n", where);
        s.m = get<std::size_t>(node, "m", where);
        if (node["seed"]) s.seed = get<std::uint64_t>(node, "seed", where);
      }
      if (node["edge_list"]) {
        s.edge_list = get<std::string>(node, "edge_list", where);
        s.network_class = "ppi";
      }
      if (node["class"]) s.network_class = get<std::string>(node, "class", where);
      cfg.networks.push_back(std::move(s));
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = parse_config(buf.str());
  // Relative paths resolve against the config file's directory.
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](std::string &p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  for (auto &n : cfg.networks) resolve(n.edge_list);
  for (auto &m : cfg.methods) resolve(m.path_template);
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (networks.empty()) throw ConfigError("no networks configured");
  if (methods.empty()) throw ConfigError("no methods configured");
  if (aligners.empty()) throw ConfigError("no aligners configured");
  if (instances_per_level < 1) throw ConfigError("instances_per_level must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (noise_levels.empty()) throw ConfigError("no noise levels configured");
  for (std::size_t i = 0; i < noise_levels.size(); ++i) {
    if (noise_levels[i] < 0 || noise_levels[i] > 100)
      throw ConfigError("noise level " + std::to_string(noise_levels[i]) + " outside [0, 100]");
    if (i > 0 && noise_levels[i] <= noise_levels[i - 1])
      throw ConfigError("noise levels must be distinct and sorted ascending");
  }
  std::set<std::string> seen;
  for (const auto &a : aligners) {
    if (a != "wave" && a != "sa") throw ConfigError("unknown aligner '" + a + "'");
    if (!seen.insert("aligner:" + a).second) throw ConfigError("duplicate aligner '" + a + "'");
  }
  for (const auto &m : methods) {
    if (!valid_name(m.name)) throw ConfigError("invalid method name '" + m.name + "'");
    if (!seen.insert("method:" + m.name).second)
      throw ConfigError("duplicate method '" + m.name + "'");
    if (m.kind == FeatureSource::kExternal && m.path_template.empty())
      throw ConfigError("external method '" + m.name + "' needs a path");
    if (m.pca.min_components < 1 || m.pca.min_components > 15)
      throw ConfigError("min_components must be within [1, 15]");
    if (!(m.pca.variance_threshold > 0 && m.pca.variance_threshold <= 1))
      throw ConfigError("pca_variance must be within (0, 1]");
  }
  for (const auto &n : networks) {
    if (!valid_name(n.name)) throw ConfigError("invalid network name '" + n.name + "'");
    if (!seen.insert("network:" + n.name).second)
      throw ConfigError("duplicate network '" + n.name + "'");
    if (n.model.empty() == n.edge_list.empty())
      throw ConfigError("network '" + n.name + "' needs exactly one of model or edge_list");
    if (!n.model.empty()) {
      if (n.model != "geo" && n.model != "sf")
        throw ConfigError("unknown model '" + n.model + "' for network '" + n.name + "'");
      const std::size_t min_n = n.model == "geo" ? 2 : 3;
      if (n.n < min_n || n.m < 1 || n.m > n.n * (n.n - 1) / 2)
        throw ConfigError("network '" + n.name + "': invalid n/m");
    }
    sa_for(n.network_class);
  }
  for (const auto &[cls, s] : sa_by_class) {
    if (s.moves ? *s.moves == 0 : !(s.time_s > 0))
      throw ConfigError("SA budget for class '" + cls + "' must be positive");
  }
}

const SaSettings &ExperimentConfig::sa_for(const std::string &network_class) const {
  auto it = sa_by_class.find(network_class);
  if (it == sa_by_class.end())
    throw ConfigError("no SA settings for network class '" + network_class + "'");
  return it->second;
}

// --- timing -------------------------------------------------------------------

namespace {

double cpu_seconds(clockid_t clock) {
  timespec ts{};
  clock_gettime(clock, &ts);
  return double(ts.tv_sec) + double(ts.tv_nsec) * 1e-9;
}

Runtime timed(clockid_t cpu_clock, const std::function<void()> &work) {
  using Clock = std::chrono::steady_clock;
  const double cpu0 = cpu_seconds(cpu_clock);
  const auto t0 = Clock::now();
  work();
  Runtime r;
  r.real_s = std::chrono::duration<double>(Clock::now() - t0).count();
  r.cpu_s = std::max(0.0, cpu_seconds(cpu_clock) - cpu0);
  return r;
}

}  // namespace

Runtime measure_runtime(const std::function<void()> &work) {
  return timed(CLOCK_PROCESS_CPUTIME_ID, work);
}

Runtime measure_graphlet_runtime(const Graph &g) {
  GdvMatrix gdv;
  return measure_runtime([&] { gdv = count_orbits(g); });
}

// --- benchmark ----------------------------------------------------------------

std::string ExperimentRecord::key() const {
  return method + "," + aligner + "," + network + "," + std::to_string(noise_pct) + "," +
         std::to_string(instance);
}

std::string cell_path(const std::string &path_template, const std::string &network, int noise_pct,
                      int instance) {
  std::string out = path_template;
  auto replace = [&](const std::string &token, const std::string &value) {
    for (auto pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos)) {
      out.replace(pos, token.size(), value);
      pos += value.size();
    }
  };
  replace("{network}", network);
  replace("{noise}", std::to_string(noise_pct));
  replace("{instance}", std::to_string(instance));
  return out;
}

BenchmarkPaths default_paths(const std::string &output_dir) {
  const fs::path d(output_dir);
  return {(d / "records.csv").string(), (d / "timings.csv").string(),
          (d / "summary.csv").string(), (d / "manifest.json").string()};
}

namespace {

Graph build_network(const NetworkSpec &spec, std::uint64_t master) {
  if (!spec.edge_list.empty()) return read_edge_list_file(spec.edge_list);
  const std::uint64_t seed = spec.seed.value_or(derive_seed(master, spec.name));
  return spec.model == "geo" ? generate_geo(spec.n, spec.m, seed) : generate_sf(spec.n, spec.m, seed);
}

struct Job {
  std::size_t network;
  int noise_pct;
  int instance;
};

std::vector<Job> grid_jobs(const ExperimentConfig &cfg) {
  std::vector<Job> jobs;
  for (std::size_t n = 0; n < cfg.networks.size(); ++n)
    for (int noise : cfg.noise_levels)
      for (int i = 0; i < cfg.instances_per_level; ++i) jobs.push_back({n, noise, i});
  return jobs;
}

nlohmann::json manifest_json(const ExperimentConfig &cfg) {
  nlohmann::json j;
  j["tool"] = "gdvalign";
  j["version"] = kVersion;
  j["master_seed"] = cfg.master_seed;
  j["noise_levels"] = cfg.noise_levels;
  j["instances_per_level"] = cfg.instances_per_level;
  j["aligners"] = cfg.aligners;
  j["rewire_mode"] = cfg.rewire_mode == RewireMode::kRemoveAdd ? "remove-add" : "degree-preserving";
  j["wave_use_votes"] = cfg.wave.use_votes;
  for (const auto &[cls, s] : cfg.sa_by_class) {
    auto &e = j["sa"][cls];
    e["time"] = s.time_s;
    if (s.moves) e["moves"] = *s.moves;
    e["init"] = s.init == SaInit::kGreedy ? "greedy" : "random";
  }
  for (const auto &m : cfg.methods) {
    nlohmann::json e{{"name", m.name}};
    if (m.kind == FeatureSource::kExternal) {
      e["kind"] = "external";
      e["path"] = m.path_template;
    } else {
      e["kind"] = "graphlet-pca";
      e["pca_variance"] = m.pca.variance_threshold;
      e["min_components"] = m.pca.min_components;
      e["log_transform"] = m.pca.log_transform;
    }
    j["methods"].push_back(e);
  }
  for (const auto &n : cfg.networks) {
    nlohmann::json e{{"name", n.name}, {"class", n.network_class}};
    if (n.model.empty()) {
      e["edge_list"] = n.edge_list;
    } else {
      e["model"] = n.model;
      e["n"] = n.n;
      e["m"] = n.m;
      e["seed"] = n.seed.value_or(derive_seed(cfg.master_seed, n.name));
    }
    j["networks"].push_back(e);
  }
  return j;
}

// Emits job results strictly in grid order regardless of completion order.
class OrderedSink {
 public:
  OrderedSink(std::size_t jobs, std::ostream &records, std::ostream &timings,
              const std::function<void(const ExperimentRecord &)> &on_record)
      : slots_(jobs), records_(records), timings_(timings), on_record_(on_record) {}

  void complete(std::size_t job, std::vector<ExperimentRecord> recs) {
    std::lock_guard lock(mu_);
    slots_[job] = std::move(recs);
    while (next_ < slots_.size() && slots_[next_]) {
      for (const auto &r : *slots_[next_]) {
        write_record(r, records_);
        timings_ << r.method << ',' << r.aligner << ',' << r.network << ',' << r.noise_pct << ','
                 << r.instance << ',' << format_double(r.embed_real_s) << ','
                 << format_double(r.embed_cpu_s) << ',' << format_double(r.align_real_s) << '\n';
        if (on_record_) on_record_(r);
      }
      records_.flush();
      timings_.flush();
      ++next_;
    }
  }

  std::vector<ExperimentRecord> take(std::size_t job) { return std::move(*slots_[job]); }

 private:
  std::mutex mu_;
  std::vector<std::optional<std::vector<ExperimentRecord>>> slots_;
  std::size_t next_ = 0;
  std::ostream &records_;
  std::ostream &timings_;
  const std::function<void(const ExperimentRecord &)> &on_record_;
};

const char *kTimingsHeader = "method,aligner,network,noise_pct,instance,embed_real_s,embed_cpu_s,align_real_s";

SimilarityMatrix graphlet_cell_similarity(const Graph &a, const Graph &b, const PcaOptions &pca,
                                          Runtime &embed) {
  LabeledGdv ga{a.labels(), {}}, gb{b.labels(), {}};
  // Per-thread CPU clock: concurrent cells must not charge each other.
  embed = timed(CLOCK_THREAD_CPUTIME_ID, [&] {
    ga.gdv = count_orbits(a);
    gb.gdv = count_orbits(b);
  });
  try {
    return graphlet_similarity(ga, gb, pca);
  } catch (const DegenerateInputError &) {
    // Raw GDVs when PCA has nothing to work with.
    FeatureMatrix fa, fb;
    fa.rows.resize(Eigen::Index(ga.gdv.size()), Eigen::Index(kNumOrbits));
    fb.rows.resize(Eigen::Index(gb.gdv.size()), Eigen::Index(kNumOrbits));
    for (std::size_t i = 0; i < ga.gdv.size(); ++i)
      for (std::size_t k = 0; k < kNumOrbits; ++k) fa.rows(Eigen::Index(i), Eigen::Index(k)) = double(ga.gdv[i][k]);
    for (std::size_t i = 0; i < gb.gdv.size(); ++i)
      for (std::size_t k = 0; k < kNumOrbits; ++k) fb.rows(Eigen::Index(i), Eigen::Index(k)) = double(gb.gdv[i][k]);
    SimilarityMatrix sim = cosine_similarity_matrix(fa, fb);
    sim.set_labels(a.labels(), b.labels());
    return sim;
  }
}

std::vector<ExperimentRecord> run_cell(const ExperimentConfig &cfg, const Graph &original,
                                       const Job &job,
                                       const std::unordered_set<std::string> &done) {
  const NetworkSpec &spec = cfg.networks[job.network];
  const std::uint64_t seed = derive_seed(cfg.master_seed, spec.name, job.noise_pct, job.instance);

  auto missing = [&](const std::string &method, const std::string &aligner) {
    ExperimentRecord probe{method, aligner, spec.name, job.noise_pct, job.instance};
    return done.count(probe.key()) == 0;
  };

  std::vector<ExperimentRecord> out;
  std::optional<NoisePair> pair;
  for (const MethodSpec &method : cfg.methods) {
    if (std::none_of(cfg.aligners.begin(), cfg.aligners.end(),
                     [&](const std::string &a) { return missing(method.name, a); }))
      continue;
    if (!pair) pair = rewire(original, job.noise_pct, seed, cfg.rewire_mode);

    Runtime embed;
    SimilarityMatrix sim;
    if (method.kind == FeatureSource::kGraphletPca) {
      sim = graphlet_cell_similarity(pair->original, pair->noisy, method.pca, embed);
    } else {
      const std::string path = cell_path(method.path_template, spec.name, job.noise_pct, job.instance);
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot open similarity file '" + path + "'");
      sim = read_similarity(in, &pair->original.labels(), &pair->noisy.labels());
    }

    for (const std::string &aligner : cfg.aligners) {
      if (!missing(method.name, aligner)) continue;
      Alignment a;
      Runtime align = timed(CLOCK_THREAD_CPUTIME_ID, [&] {
        if (aligner == "wave") {
          a = wave_align(pair->original, pair->noisy, sim, cfg.wave);
        } else {
          const SaSettings &s = cfg.sa_for(spec.network_class);
          SaConfig sc;
          sc.time_budget_s = s.time_s;
          sc.move_budget = s.moves;
          sc.init = s.init;
          sc.seed = mix64(seed + 1);
          a = sa_align(pair->original, pair->noisy, sim, sc).alignment;
        }
      });
      ExperimentRecord r;
      r.method = method.name;
      r.aligner = aligner;
      r.network = spec.name;
      r.noise_pct = job.noise_pct;
      r.instance = job.instance;
      r.seed = seed;
      r.node_correctness = node_correctness(a, pair->true_mapping);
      r.s3 = s3_score(pair->original, pair->noisy, a);
      r.embed_real_s = embed.real_s;
      r.embed_cpu_s = embed.cpu_s;
      r.align_real_s = align.real_s;
      out.push_back(std::move(r));
    }
  }
  return out;
}

void check_external_files(const ExperimentConfig &cfg) {
  for (const NetworkSpec &n : cfg.networks)
    if (!n.edge_list.empty() && !fs::exists(n.edge_list))
      throw ConfigError("edge list '" + n.edge_list + "' for network '" + n.name +
                        "' does not exist");
  for (const MethodSpec &m : cfg.methods) {
    if (m.kind != FeatureSource::kExternal) continue;
    for (const Job &job : grid_jobs(cfg)) {
      const std::string path =
          cell_path(m.path_template, cfg.networks[job.network].name, job.noise_pct, job.instance);
      if (!fs::exists(path))
        throw ConfigError("similarity file '" + path + "' for method '" + m.name + "' is missing");
    }
  }
}

}  // namespace

void export_noisy_pairs(const ExperimentConfig &cfg, const std::string &dir) {
  cfg.validate();
  fs::create_directories(dir);
  for (std::size_t n = 0; n < cfg.networks.size(); ++n) {
    const NetworkSpec &spec = cfg.networks[n];
    Graph original = build_network(spec, cfg.master_seed);
    write_edge_list_file(original, (fs::path(dir) / (spec.name + "_original.txt")).string());
    for (int noise : cfg.noise_levels)
      for (int i = 0; i < cfg.instances_per_level; ++i) {
        NoisePair pair =
            rewire(original, noise, derive_seed(cfg.master_seed, spec.name, noise, i), cfg.rewire_mode);
        write_edge_list_file(pair.noisy,
                             cell_path((fs::path(dir) / "{network}_{noise}_{instance}.txt").string(),
                                       spec.name, noise, i));
      }
  }
}

std::vector<ExperimentRecord> run_benchmark(
    const ExperimentConfig &cfg, const BenchmarkPaths &paths,
    const std::function<void(const ExperimentRecord &)> &on_record) {
  cfg.validate();
  check_external_files(cfg);

  for (const std::string *p : {&paths.records, &paths.timings, &paths.summary, &paths.manifest}) {
    const fs::path parent = fs::path(*p).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
  }

  std::vector<ExperimentRecord> existing;
  if (fs::exists(paths.records)) {
    std::ifstream rec(paths.records);
    std::ifstream tim(paths.timings);
    existing = read_records(rec, tim ? &tim : nullptr);
  }
  std::unordered_set<std::string> done;
  std::unordered_map<std::string, ExperimentRecord> by_key;
  for (const auto &r : existing) {
    done.insert(r.key());
    by_key.emplace(r.key(), r);
  }

  {
    std::ofstream manifest(paths.manifest);
    if (!manifest) throw ConfigError("cannot write '" + paths.manifest + "'");
    manifest << manifest_json(cfg).dump(2) << '\n';
  }

  const bool fresh = !fs::exists(paths.records);
  std::ofstream records(paths.records, std::ios::app);
  std::ofstream timings(paths.timings, std::ios::app);
  if (!records || !timings) throw ConfigError("cannot write benchmark output");
  if (fresh) write_records_header(records);
  if (fresh || fs::file_size(paths.timings) == 0) timings << kTimingsHeader << '\n';

  std::vector<Graph> networks;
  for (const auto &spec : cfg.networks) networks.push_back(build_network(spec, cfg.master_seed));

  const std::vector<Job> jobs = grid_jobs(cfg);
  OrderedSink sink(jobs.size(), records, timings, on_record);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed) return;
      try {
        sink.complete(i, run_cell(cfg, networks[jobs[i].network], jobs[i], done));
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned count = std::max(1u, std::min<unsigned>(cfg.workers, unsigned(jobs.size())));
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  // Whole grid in grid order, old and new records merged.
  std::vector<ExperimentRecord> all;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (auto &r : sink.take(i)) by_key.insert_or_assign(r.key(), std::move(r));
    const Job &job = jobs[i];
    for (const auto &m : cfg.methods)
      for (const auto &a : cfg.aligners) {
        ExperimentRecord probe{m.name, a, cfg.networks[job.network].name, job.noise_pct, job.instance};
        auto it = by_key.find(probe.key());
        if (it != by_key.end()) all.push_back(it->second);
      }
  }

  std::ofstream summary(paths.summary);
  write_summary(aggregate(all, std::size_t(cfg.instances_per_level)), summary);
  return all;
}

// --- CSV ----------------------------------------------------------------------

void write_records_header(std::ostream &out) {
  out << "method,aligner,network,noise_pct,instance,seed,node_correctness,s3\n";
}

void write_record(const ExperimentRecord &r, std::ostream &out) {
  out << r.method << ',' << r.aligner << ',' << r.network << ',' << r.noise_pct << ','
      << r.instance << ',' << r.seed << ',' << format_double(r.node_correctness) << ','
      << format_double(r.s3) << '\n';
}

namespace {

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <typename T>
T parse_number(const std::string &s, std::size_t line_no) {
  T value{};
  std::istringstream in(s);
  if (!(in >> value) || !in.eof()) throw FormatError("invalid number '" + s + "'", line_no);
  return value;
}

}  // namespace

std::vector<ExperimentRecord> read_records(std::istream &records, std::istream *timings) {
  std::vector<ExperimentRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(records, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (header) {
      header = false;
      if (!cells.empty() && cells[0] == "method") continue;
    }
    if (cells.size() != 8) throw FormatError("expected 8 columns", line_no);
    ExperimentRecord r;
    r.method = cells[0];
    r.aligner = cells[1];
    r.network = cells[2];
    r.noise_pct = parse_number<int>(cells[3], line_no);
    r.instance = parse_number<int>(cells[4], line_no);
    r.seed = parse_number<std::uint64_t>(cells[5], line_no);
    r.node_correctness = parse_number<double>(cells[6], line_no);
    r.s3 = parse_number<double>(cells[7], line_no);
    out.push_back(std::move(r));
  }
  if (timings) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < out.size(); ++i) index.emplace(out[i].key(), i);
    line_no = 0;
    while (std::getline(*timings, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto cells = split_csv(line);
      if (cells.size() != 8 || cells[0] == "method") continue;
      auto it = index.find(cells[0] + "," + cells[1] + "," + cells[2] + "," + cells[3] + "," + cells[4]);
      if (it == index.end()) continue;
      out[it->second].embed_real_s = parse_number<double>(cells[5], line_no);
      out[it->second].embed_cpu_s = parse_number<double>(cells[6], line_no);
      out[it->second].align_real_s = parse_number<double>(cells[7], line_no);
    }
  }
  return out;
}

std::vector<ExperimentRecord> read_records_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open records file '" + path + "'");
  return read_records(in);
}

// --- aggregation and ranking --------------------------------------------------

std::vector<CellMean> aggregate(const std::vector<ExperimentRecord> &records,
                                std::size_t expected_instances) {
  std::vector<CellMean> cells;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto &r : records) {
    const std::string key =
        r.method + "," + r.aligner + "," + r.network + "," + std::to_string(r.noise_pct);
    auto [it, inserted] = index.emplace(key, cells.size());
    if (inserted) cells.push_back(CellMean{r.method, r.aligner, r.network, r.noise_pct});
    CellMean &c = cells[it->second];
    ++c.instances;
    c.mean_nc += r.node_correctness;
    c.mean_s3 += r.s3;
  }
  for (auto &c : cells) {
    c.mean_nc /= double(c.instances);
    c.mean_s3 /= double(c.instances);
    c.complete = expected_instances == 0 || c.instances >= expected_instances;
  }
  return cells;
}

void write_summary(const std::vector<CellMean> &cells, std::ostream &out) {
  out << "method,aligner,network,noise_pct,instances,complete,mean_node_correctness,mean_s3\n";
  for (const auto &c : cells)
    out << c.method << ',' << c.aligner << ',' << c.network << ',' << c.noise_pct << ','
        << c.instances << ',' << (c.complete ? 1 : 0) << ',' << format_double(c.mean_nc) << ','
        << format_double(c.mean_s3) << '\n';
}

double RankTable::percent(const std::string &method, int rank) const {
  auto it = counts.find(method);
  if (it == counts.end() || rank < 1 || std::size_t(rank) > it->second.size() || scored_cells == 0)
    return 0.0;
  return 100.0 * double(it->second[std::size_t(rank - 1)]) / double(scored_cells);
}

double RankTable::sole_best_percent(const std::string &method) const {
  auto it = sole_best.find(method);
  if (it == sole_best.end() || scored_cells == 0) return 0.0;
  return 100.0 * double(it->second) / double(scored_cells);
}

double RankTable::tie_percent(const std::string &group) const {
  auto it = ties.find(group);
  if (it == ties.end() || scored_cells == 0) return 0.0;
  return 100.0 * double(it->second) / double(scored_cells);
}

RankTable rank_methods(const std::vector<CellMean> &cells, double tie_epsilon, int max_noise) {
  RankTable table;
  std::vector<std::string> group_order;
  std::map<std::string, std::map<std::string, double>> groups;
  for (const auto &c : cells) {
    if (std::find(table.methods.begin(), table.methods.end(), c.method) == table.methods.end())
      table.methods.push_back(c.method);
    if (c.noise_pct > max_noise) continue;
    const std::string key = c.aligner + "," + c.network + "," + std::to_string(c.noise_pct);
    if (!groups.count(key)) group_order.push_back(key);
    groups[key][c.method] = c.mean_nc;
  }
  if (table.methods.size() < 2) throw ParameterError("ranking needs at least two methods");

  const std::size_t k = table.methods.size();
  for (const auto &m : table.methods) {
    table.counts[m].assign(k, 0);
    table.sole_best[m] = 0;
  }

  for (const auto &key : group_order) {
    const auto &nc = groups[key];
    if (nc.size() != k) {
      ++table.excluded_cells;
      table.warnings.push_back("cell " + key + " lacks some methods; excluded");
      continue;
    }
    ++table.scored_cells;
    std::vector<std::string> best;
    for (const auto &m : table.methods) {
      std::size_t better = 0;
      for (const auto &other : table.methods)
        if (nc.at(other) > nc.at(m) + tie_epsilon) ++better;
      ++table.counts[m][better];
      if (better == 0) best.push_back(m);
    }
    if (best.size() == 1) {
      ++table.sole_best[best[0]];
    } else {
      std::string group;
      for (const auto &m : best) group += (group.empty() ? "" : "+") + m;
      ++table.ties[group];
    }
  }
  return table;
}

void write_rank_table(const RankTable &table, std::ostream &out) {
  out << "method,rank,count,percent\n";
  for (const auto &m : table.methods)
    for (std::size_t r = 1; r <= table.methods.size(); ++r)
      out << m << ',' << r << ',' << table.counts.at(m)[r - 1] << ','
          << format_double(std::round(table.percent(m, int(r)) * 100.0) / 100.0) << '\n';
  out << "\nsole_best,count,percent\n";
  for (const auto &m : table.methods)
    out << m << ',' << table.sole_best.at(m) << ','
        << format_double(std::round(table.sole_best_percent(m) * 100.0) / 100.0) << '\n';
  out << "\ntie_group,count,percent\n";
  for (const auto &[group, count] : table.ties)
    out << group << ',' << count << ','
        << format_double(std::round(table.tie_percent(group) * 100.0) / 100.0) << '\n';
  out << "\nscored_cells," << table.scored_cells << "\nexcluded_cells," << table.excluded_cells
      << '\n';
}

}  // namespace gdvalign
