#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gdvalign {

using NodeId = std::uint32_t;

struct Edge {
  NodeId u;
  NodeId v;

  friend auto operator<=>(const Edge &, const Edge &) = default;
};

// Immutable undirected simple graph. Node ids are 0..n-1; adjacency is stored
// in CSR form with each neighbor list sorted ascending. Every node carries a
// distinct string label.
class Graph {
 public:
  Graph() = default;

  // Builds a graph from an arbitrary edge list: self-loops are dropped,
  // (u,v)/(v,u) duplicates collapsed. Endpoints must be < n. When labels is
  // empty, node i is labelled with its decimal id.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges,
                          std::vector<std::string> labels = {});

  std::size_t num_nodes() const noexcept { return labels_.size(); }
  std::size_t num_edges() const noexcept { return adjacency_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId u) const noexcept {
    return {adjacency_.data() + offsets_[u], adjacency_.data() + offsets_[u + 1]};
  }
  std::size_t degree(NodeId u) const noexcept {
    return offsets_[u + 1] - offsets_[u];
  }
  bool has_edge(NodeId u, NodeId v) const noexcept;

  // Undirected edges with u < v, sorted by (u, v).
  std::vector<Edge> edges() const;

  const std::vector<std::string> &labels() const noexcept { return labels_; }
  const std::string &label(NodeId u) const noexcept { return labels_[u]; }
  std::optional<NodeId> find(std::string_view label) const;

  // Throws InternalError describing the first violated invariant.
  void check_invariants() const;

  friend bool operator==(const Graph &a, const Graph &b) {
    return a.offsets_ == b.offsets_ && a.adjacency_ == b.adjacency_ &&
           a.labels_ == b.labels_;
  }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
};

struct ParsedEdgeList {
  Graph graph;
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;
};

// Whitespace-separated "name name [ignored...]" lines; '#' starts a comment
// line. Ids follow first appearance. Throws FormatError.
ParsedEdgeList parse_edge_list(std::istream &in);
ParsedEdgeList parse_edge_list(std::string_view text);

void serialize_edge_list(const Graph &g, std::ostream &out);
std::string serialize_edge_list(const Graph &g);

Graph read_edge_list_file(const std::string &path);
void write_edge_list_file(const Graph &g, const std::string &path);

}  // namespace gdvalign
