#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gdvalign/aligners.h"
#include "gdvalign/embedding.h"
#include "gdvalign/errors.h"
#include "gdvalign/generators.h"
#include "gdvalign/graph.h"
#include "gdvalign/graphlets.h"
#include "gdvalign/harness.h"
#include "gdvalign/version.h"

namespace py = pybind11;
using namespace gdvalign;

namespace {

py::array_t<std::uint64_t> gdv_to_array(const GdvMatrix &gdv) {
  py::array_t<std::uint64_t> out({py::ssize_t(gdv.size()), py::ssize_t(kNumOrbits)});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < gdv.size(); ++i)
    for (std::size_t k = 0; k < kNumOrbits; ++k) view(py::ssize_t(i), py::ssize_t(k)) = gdv[i][k];
  return out;
}

GdvMatrix array_to_gdv(const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> &a) {
  if (a.ndim() != 2 || a.shape(1) != py::ssize_t(kNumOrbits))
    throw ParameterError("GDV array must have shape (n, 15)");
  auto view = a.unchecked<2>();
  GdvMatrix gdv(std::size_t(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t k = 0; k < py::ssize_t(kNumOrbits); ++k) gdv[std::size_t(i)][std::size_t(k)] = view(i, k);
  return gdv;
}

py::array_t<double> sim_to_array(const SimilarityMatrix &s) {
  py::array_t<double> out({py::ssize_t(s.rows()), py::ssize_t(s.cols())});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j) view(py::ssize_t(i), py::ssize_t(j)) = s(i, j);
  return out;
}

SimilarityMatrix array_to_sim(const py::array_t<double, py::array::c_style | py::array::forcecast> &a) {
  if (a.ndim() != 2) throw ParameterError("similarity array must be two-dimensional");
  auto view = a.unchecked<2>();
  SimilarityMatrix s(std::size_t(a.shape(0)), std::size_t(a.shape(1)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j) {
      const double v = view(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("similarities must lie in [0, 1]");
      s(std::size_t(i), std::size_t(j)) = v;
    }
  return s;
}

py::dict alignment_dict(const Alignment &a) {
  py::dict d;
  d["mapping"] = a.mapping;
  d["swapped"] = a.swapped;
  return d;
}

Alignment dict_alignment(const std::vector<NodeId> &mapping, bool swapped) {
  return Alignment{mapping, swapped};
}

py::dict record_dict(const ExperimentRecord &r) {
  py::dict d;
  d["method"] = r.method;
  d["aligner"] = r.aligner;
  d["network"] = r.network;
  d["noise_pct"] = r.noise_pct;
  d["instance"] = r.instance;
  d["seed"] = r.seed;
  d["node_correctness"] = r.node_correctness;
  d["s3"] = r.s3;
  d["embed_real_s"] = r.embed_real_s;
  d["embed_cpu_s"] = r.embed_cpu_s;
  d["align_real_s"] = r.align_real_s;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Graphlet degree vectors, node similarity and network alignment";
  m.attr("__version__") = kVersion;
  m.attr("NUM_ORBITS") = kNumOrbits;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base.ptr());

  py::class_<Graph>(m, "Graph")
      .def(py::init([](std::size_t n, const std::vector<std::pair<NodeId, NodeId>> &edges,
                       std::vector<std::string> labels) {
             std::vector<Edge> e;
             e.reserve(edges.size());
             for (auto [u, v] : edges) e.push_back({u, v});
             return Graph::from_edges(n, e, std::move(labels));
           }),
           py::arg("n"), py::arg("edges"), py::arg("labels") = std::vector<std::string>{})
      .def_static("parse", [](const std::string &text) { return parse_edge_list(text).graph; },
                  py::arg("text"), "Parse an edge list.")
      .def_static("read", &read_edge_list_file, py::arg("path"))
      .def("write", [](const Graph &g, const std::string &path) { write_edge_list_file(g, path); },
           py::arg("path"))
      .def("serialize", [](const Graph &g) { return serialize_edge_list(g); })
      .def_property_readonly("num_nodes", &Graph::num_nodes)
      .def_property_readonly("num_edges", &Graph::num_edges)
      .def_property_readonly("labels", &Graph::labels)
      .def("degree", &Graph::degree, py::arg("u"))
      .def("neighbors",
           [](const Graph &g, NodeId u) {
             auto nb = g.neighbors(u);
             return std::vector<NodeId>(nb.begin(), nb.end());
           },
           py::arg("u"))
      .def("has_edge", &Graph::has_edge, py::arg("u"), py::arg("v"))
      .def("edges",
           [](const Graph &g) {
             std::vector<std::pair<NodeId, NodeId>> out;
             for (const Edge &e : g.edges()) out.emplace_back(e.u, e.v);
             return out;
           })
      .def("find", &Graph::find, py::arg("label"))
      .def("__eq__", [](const Graph &a, const Graph &b) { return a == b; })
      .def("__repr__", [](const Graph &g) {
        return "<Graph n=" + std::to_string(g.num_nodes()) + " m=" + std::to_string(g.num_edges()) +
               ">";
      });

  m.def("generate_geo", &generate_geo, py::arg("n"), py::arg("m"), py::arg("seed"));
  m.def("generate_sf", &generate_sf, py::arg("n"), py::arg("m"), py::arg("seed"));
  m.def(
      "rewire",
      [](const Graph &g, int noise_pct, std::uint64_t seed, bool degree_preserving) {
        NoisePair p = rewire(g, noise_pct, seed,
                             degree_preserving ? RewireMode::kDegreePreserving : RewireMode::kRemoveAdd);
        return py::make_tuple(std::move(p.noisy), std::move(p.true_mapping));
      },
      py::arg("g"), py::arg("noise_pct"), py::arg("seed"), py::arg("degree_preserving") = false,
      "Return (noisy graph, true mapping).");
  m.def("derive_seed",
        py::overload_cast<std::uint64_t, std::string_view, int, int>(&derive_seed),
        py::arg("master"), py::arg("network"), py::arg("noise_pct"), py::arg("instance"));

  m.def(
      "count_orbits",
      [](const Graph &g, unsigned threads) {
        GdvMatrix gdv;
        {
          py::gil_scoped_release release;
          gdv = count_orbits(g, threads);
        }
        return gdv_to_array(gdv);
      },
      py::arg("g"), py::arg("threads") = 1u);
  m.def("brute_force_orbits", [](const Graph &g) { return gdv_to_array(brute_force_orbits(g)); },
        py::arg("g"));

  m.def(
      "pca_reduce",
      [](const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> &a,
         const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> &b,
         double variance, int min_components, bool log_transform) {
        PcaResult r =
            pca_reduce(array_to_gdv(a), array_to_gdv(b), PcaOptions{variance, min_components, log_transform});
        py::dict d;
        d["first"] = r.first.rows;
        d["second"] = r.second.rows;
        d["components"] = r.components;
        d["explained_variance"] = r.explained_variance;
        d["eigenvalues"] = r.eigenvalues;
        return d;
      },
      py::arg("gdv1"), py::arg("gdv2"), py::arg("variance") = 0.90, py::arg("min_components") = 2,
      py::arg("log_transform") = false);
  m.def(
      "graphlet_similarity",
      [](const Graph &g1, const Graph &g2, double variance, int min_components, bool log_transform) {
        LabeledGdv a{g1.labels(), count_orbits(g1)}, b{g2.labels(), count_orbits(g2)};
        return sim_to_array(graphlet_similarity(a, b, PcaOptions{variance, min_components, log_transform}));
      },
      py::arg("g1"), py::arg("g2"), py::arg("variance") = 0.90, py::arg("min_components") = 2,
      py::arg("log_transform") = false,
      "Similarity matrix of shape (g1.num_nodes, g2.num_nodes).");

  m.def(
      "wave_align",
      [](const Graph &g1, const Graph &g2,
         const py::array_t<double, py::array::c_style | py::array::forcecast> &sim, bool use_votes) {
        SimilarityMatrix s = array_to_sim(sim);
        Alignment a;
        {
          py::gil_scoped_release release;
          a = wave_align(g1, g2, s, WaveOptions{use_votes});
        }
        return alignment_dict(a);
      },
      py::arg("g1"), py::arg("g2"), py::arg("sim"), py::arg("use_votes") = true);
  m.def(
      "sa_align",
      [](const Graph &g1, const Graph &g2,
         const py::array_t<double, py::array::c_style | py::array::forcecast> &sim, double w_s3,
         double w_esim, std::optional<std::uint64_t> moves, double time_s, std::uint64_t seed,
         std::string init, std::optional<std::vector<NodeId>> initial_mapping) {
        SimilarityMatrix s = array_to_sim(sim);
        SaConfig cfg;
        cfg.w_s3 = w_s3;
        cfg.w_esim = w_esim;
        cfg.move_budget = moves;
        cfg.time_budget_s = time_s;
        cfg.seed = seed;
        if (initial_mapping) {
          cfg.init = SaInit::kGiven;
          cfg.initial_mapping = *initial_mapping;
        } else if (init == "greedy") {
          cfg.init = SaInit::kGreedy;
        } else if (init != "random") {
          throw ParameterError("init must be 'random' or 'greedy'");
        }
        SaResult r;
        {
          py::gil_scoped_release release;
          r = sa_align(g1, g2, s, cfg);
        }
        py::dict d = alignment_dict(r.alignment);
        d["objective"] = r.objective;
        d["s3"] = r.s3;
        d["esim"] = r.esim;
        d["moves"] = r.moves;
        return d;
      },
      py::arg("g1"), py::arg("g2"), py::arg("sim"), py::arg("w_s3") = 1.0, py::arg("w_esim") = 1.0,
      py::arg("moves") = py::none(), py::arg("time_s") = 300.0, py::arg("seed") = 0,
      py::arg("init") = "random", py::arg("initial_mapping") = py::none());

  m.def(
      "s3_score",
      [](const Graph &g1, const Graph &g2, const std::vector<NodeId> &mapping, bool swapped) {
        return s3_score(g1, g2, dict_alignment(mapping, swapped));
      },
      py::arg("g1"), py::arg("g2"), py::arg("mapping"), py::arg("swapped") = false);
  m.def(
      "node_correctness",
      [](const std::vector<NodeId> &mapping, const std::vector<NodeId> &truth) {
        return node_correctness(Alignment{mapping, false}, truth);
      },
      py::arg("mapping"), py::arg("truth"));

  m.def(
      "run_benchmark",
      [](const std::string &config_path, std::optional<std::string> output_dir) {
        ExperimentConfig cfg = load_config(config_path);
        if (output_dir) cfg.output_dir = *output_dir;
        std::vector<ExperimentRecord> records;
        {
          py::gil_scoped_release release;
          records = run_benchmark(cfg, default_paths(cfg.output_dir));
        }
        py::list out;
        for (const auto &r : records) out.append(record_dict(r));
        return out;
      },
      py::arg("config_path"), py::arg("output_dir") = py::none());
  m.def(
      "rank_records",
      [](const std::string &records_path, double epsilon, int max_noise) {
        RankTable t = rank_methods(aggregate(read_records_file(records_path)), epsilon, max_noise);
        std::ostringstream out;
        write_rank_table(t, out);
        return out.str();
      },
      py::arg("records_path"), py::arg("epsilon") = 0.005, py::arg("max_noise") = 50);
}
