#pragma once

#include <cstdint>
#include <vector>

#include "gdvalign/graph.h"

namespace gdvalign::detail {

// Constant-time adjacency for graphs that fit a bit matrix, binary search otherwise.
class AdjacencyTest {
 public:
  explicit AdjacencyTest(const Graph &g) : g_(&g) {
    const std::size_t n = g.num_nodes();
    if (n <= kDenseLimit) {
      words_ = (n + 63) / 64;
      bits_.assign(n * words_, 0);
      for (NodeId u = 0; u < n; ++u)
        for (NodeId v : g.neighbors(u)) bits_[u * words_ + v / 64] |= 1ULL << (v % 64);
    }
  }

  bool operator()(NodeId u, NodeId v) const {
    if (!bits_.empty()) return (bits_[u * words_ + v / 64] >> (v % 64)) & 1ULL;
    return g_->has_edge(u, v);
  }

 private:
  static constexpr std::size_t kDenseLimit = 20000;
  const Graph *g_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

}  // namespace gdvalign::detail
