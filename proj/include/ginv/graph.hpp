#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace ginv {

using VertexId = std::uint32_t;
using AttrId = std::uint8_t;
using Edge = std::pair<VertexId, VertexId>;

// Simple undirected graph with optional discrete vertex attributes and an
// optional class label. Immutable once constructed; edges are stored with
// u < v in sorted order and mirrored into a CSR adjacency.
class Graph {
 public:
  Graph() = default;

  // Throws InvariantViolation on self-loops, duplicate pairs, endpoints out of
  // range, or an attribute list whose length differs from n.
  Graph(std::uint32_t n, std::vector<Edge> edges,
        std::optional<std::vector<AttrId>> attrs = std::nullopt,
        std::optional<int> label = std::nullopt);

  std::uint32_t n() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_attrs() const { return attrs_.has_value(); }
  const std::optional<std::vector<AttrId>>& attrs() const { return attrs_; }
  // Null attribute (0) when the graph is unattributed.
  AttrId attr(VertexId v) const { return attrs_ ? (*attrs_)[v] : AttrId{0}; }
  AttrId max_attr() const;

  const std::optional<int>& label() const { return label_; }
  Graph with_label(std::optional<int> label) const;

  std::span<const VertexId> neighbors(VertexId v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::size_t degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(VertexId u, VertexId v) const;

  // Relabels vertex v to perm[v].
  Graph permuted(std::span<const VertexId> perm) const;

  // Hash of (n, edges, attrs); the label is not part of the content hash.
  std::uint64_t content_hash() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_ && a.attrs_ == b.attrs_ && a.label_ == b.label_;
  }

 private:
  std::uint32_t n_ = 0;
  std::vector<Edge> edges_;
  std::optional<std::vector<AttrId>> attrs_;
  std::optional<int> label_;
  std::vector<std::size_t> offsets_{0};
  std::vector<VertexId> targets_;
};

}  // namespace ginv
