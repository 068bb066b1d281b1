#include "ginv/graph.hpp"

#include <algorithm>
#include <string>

#include "ginv/errors.hpp"
#include "ginv/hash.hpp"

namespace ginv {

Graph::Graph(std::uint32_t n, std::vector<Edge> edges, std::optional<std::vector<AttrId>> attrs,
             std::optional<int> label)
    : n_(n), edges_(std::move(edges)), attrs_(std::move(attrs)), label_(label) {
  for (auto& [u, v] : edges_) {
    if (u >= n_ || v >= n_) {
      throw InvariantViolation("edge (" + std::to_string(u) + "," + std::to_string(v) +
                               ") has an endpoint >= n=" + std::to_string(n_));
    }
    if (u == v) throw InvariantViolation("self-loop at vertex " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
    throw InvariantViolation("duplicate edge (" + std::to_string(dup->first) + "," +
                             std::to_string(dup->second) + ")");
  }
  if (attrs_ && attrs_->size() != n_) {
    throw InvariantViolation("attrs has " + std::to_string(attrs_->size()) +
                             " entries, expected n=" + std::to_string(n_));
  }
  if (label_ && *label_ < 0) throw InvariantViolation("negative label");

  std::vector<std::size_t> degree(n_, 0);
  for (const auto& [u, v] : edges_) {
    ++degree[u];
    ++degree[v];
  }
  offsets_.assign(n_ + 1, 0);
  for (std::uint32_t v = 0; v < n_; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  targets_.resize(offsets_[n_]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [u, v] : edges_) {
    targets_[fill[u]++] = v;
    targets_[fill[v]++] = u;
  }
  for (std::uint32_t v = 0; v < n_; ++v) {
    std::sort(targets_.begin() + offsets_[v], targets_.begin() + offsets_[v + 1]);
  }
}

AttrId Graph::max_attr() const {
  if (!attrs_ || attrs_->empty()) return 0;
  return *std::max_element(attrs_->begin(), attrs_->end());
}

Graph Graph::with_label(std::optional<int> label) const {
  Graph g = *this;
  if (label && *label < 0) throw InvariantViolation("negative label");
  g.label_ = label;
  return g;
}

bool Graph::has_edge(VertexId u, VertexId v) const {
  if (u >= n_ || v >= n_) return false;
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

Graph Graph::permuted(std::span<const VertexId> perm) const {
  if (perm.size() != n_) throw InvariantViolation("permutation length differs from n");
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const auto& [u, v] : edges_) edges.emplace_back(perm[u], perm[v]);
  std::optional<std::vector<AttrId>> attrs;
  if (attrs_) {
    attrs.emplace(n_);
    for (std::uint32_t v = 0; v < n_; ++v) (*attrs)[perm[v]] = (*attrs_)[v];
  }
  return Graph(n_, std::move(edges), std::move(attrs), label_);
}

std::uint64_t Graph::content_hash() const {
  Fnv64 h;
  h.integer(n_).integer(static_cast<std::uint64_t>(edges_.size()));
  for (const auto& [u, v] : edges_) h.integer(u).integer(v);
  h.integer(static_cast<std::uint8_t>(attrs_ ? 1 : 0));
  if (attrs_) h.bytes(attrs_->data(), attrs_->size());
  return h.digest();
}

}  // namespace ginv
