#include "gdvalign/graph.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gdvalign/errors.h"

namespace gdvalign {

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges,
                        std::vector<std::string> labels) {
  if (labels.empty()) {
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != n)
    throw ParameterError("label table size does not match node count");

  Graph g;
  g.labels_ = std::move(labels);
  g.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.index_.emplace(g.labels_[i], static_cast<NodeId>(i)).second)
      throw ParameterError("duplicate node label '" + g.labels_[i] + "'");
  }

  std::vector<Edge> arcs;
  arcs.reserve(edges.size() * 2);
  for (const Edge &e : edges) {
    if (e.u >= n || e.v >= n) throw ParameterError("edge endpoint out of range");
    if (e.u == e.v) continue;
    arcs.push_back({e.u, e.v});
    arcs.push_back({e.v, e.u});
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

  g.offsets_.assign(n + 1, 0);
  for (const Edge &a : arcs) ++g.offsets_[a.u + 1];
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.adjacency_.reserve(arcs.size());
  for (const Edge &a : arcs) g.adjacency_.push_back(a.v);
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const noexcept {
  // Probe the shorter list.
  if (degree(u) > degree(v)) std::swap(u, v);
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.push_back({u, v});
  return out;
}

std::optional<NodeId> Graph::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Graph::check_invariants() const {
  const std::size_t n = num_nodes();
  if (offsets_.size() != n + 1 || offsets_.back() != adjacency_.size())
    throw InternalError("CSR offsets inconsistent with adjacency");
  if (adjacency_.size() % 2 != 0)
    throw InternalError("degree sum is odd");
  for (NodeId u = 0; u < n; ++u) {
    auto nb = neighbors(u);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (nb[i] >= n) throw InternalError("neighbor id out of range");
      if (nb[i] == u) throw InternalError("self-loop present");
      if (i > 0 && nb[i - 1] >= nb[i])
        throw InternalError("adjacency not strictly ascending");
      auto back = neighbors(nb[i]);
      if (!std::binary_search(back.begin(), back.end(), u))
        throw InternalError("asymmetric adjacency");
    }
  }
  if (index_.size() != n) throw InternalError("labels are not distinct");
}

namespace {

void parse_line(std::string_view line, std::size_t line_no,
                std::vector<std::string_view> &tokens) {
  tokens.clear();
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  if (tokens.size() == 1)
    throw FormatError("expected two node names, found one", line_no);
}

}  // namespace

ParsedEdgeList parse_edge_list(std::istream &in) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> ids;
  std::vector<Edge> edges;
  std::size_t self_loops = 0;

  auto intern = [&](std::string_view name) {
    auto [it, inserted] =
        ids.emplace(std::string(name), static_cast<NodeId>(labels.size()));
    if (inserted) labels.emplace_back(name);
    return it->second;
  };

  std::string line;
  std::vector<std::string_view> tokens;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    auto first = view.find_first_not_of(" \t\r\v\f");
    if (first == std::string_view::npos || view[first] == '#') continue;
    parse_line(view, line_no, tokens);
    NodeId u = intern(tokens[0]);
    NodeId v = intern(tokens[1]);
    if (u == v) {
      ++self_loops;
      continue;
    }
    edges.push_back({std::min(u, v), std::max(u, v)});
  }
  if (edges.empty()) throw FormatError("no edges");

  ParsedEdgeList out;
  out.self_loops = self_loops;
  std::size_t raw = edges.size();
  const std::size_t n = labels.size();
  out.graph = Graph::from_edges(n, edges, std::move(labels));
  out.duplicates = raw - out.graph.num_edges();
  return out;
}

ParsedEdgeList parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in);
}

void serialize_edge_list(const Graph &g, std::ostream &out) {
  for (const Edge &e : g.edges())
    out << g.label(e.u) << ' ' << g.label(e.v) << '\n';
}

std::string serialize_edge_list(const Graph &g) {
  std::ostringstream out;
  serialize_edge_list(g, out);
  return out.str();
}

Graph read_edge_list_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open edge list '" + path + "'");
  return parse_edge_list(in).graph;
}

void write_edge_list_file(const Graph &g, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  serialize_edge_list(g, out);
}

}  // namespace gdvalign
