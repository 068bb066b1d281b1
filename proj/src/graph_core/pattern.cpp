#include "ginv/pattern.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "ginv/errors.hpp"
#include "ginv/hash.hpp"

namespace ginv {

bool topology_connected(int k, std::uint32_t bits) {
  if (k <= 1) return k == 1;
  std::uint32_t seen = 1u, frontier = 1u;
  while (frontier != 0) {
    std::uint32_t next = 0;
    for (int v = 0; v < k; ++v) {
      if (!((frontier >> v) & 1u)) continue;
      for (int u = 0; u < k; ++u) {
        if (u == v) continue;
        int a = std::min(u, v), b = std::max(u, v);
        if ((bits >> pair_index(a, b)) & 1u) next |= 1u << u;
      }
    }
    frontier = next & ~seen;
    seen |= next;
  }
  return seen == (1u << k) - 1u;
}

int PatternCode::num_edges() const { return std::popcount(topo_bits); }

std::string PatternCode::to_string() const {
  std::string s = std::to_string(k) + ":" + std::to_string(topo_bits) + ":";
  for (int i = 0; i < k; ++i) {
    if (i) s += ',';
    s += std::to_string(attrs[i]);
  }
  return s;
}

std::size_t PatternCodeHash::operator()(const PatternCode& c) const {
  Fnv64 h;
  h.integer(c.k).integer(c.topo_bits).bytes(c.attrs.data(), c.attrs.size());
  return static_cast<std::size_t>(h.digest());
}

PatternCode canonical_code(int k, std::uint32_t adj_bits, std::span<const AttrId> attrs) {
  if (k < 1 || k > kMaxPatternSize) {
    throw ConfigError("pattern size " + std::to_string(k) + " outside [1, " +
                      std::to_string(kMaxPatternSize) + "]");
  }
  if (attrs.size() != static_cast<std::size_t>(k)) {
    throw InvariantViolation("attribute tuple length differs from pattern size");
  }
  const std::uint32_t valid = num_pairs(k) >= 32 ? ~0u : (1u << num_pairs(k)) - 1u;
  adj_bits &= valid;
  if (!topology_connected(k, adj_bits)) {
    throw DisconnectedPattern("pattern with topology bits " + std::to_string(adj_bits) +
                              " on " + std::to_string(k) + " vertices is not connected");
  }

  std::array<std::pair<int, int>, num_pairs(kMaxPatternSize)> edge_list{};
  int m = 0;
  for (int j = 1; j < k; ++j)
    for (int i = 0; i < j; ++i)
      if ((adj_bits >> pair_index(i, j)) & 1u) edge_list[m++] = {i, j};

  // pos[v] is the new position of vertex v.
  std::array<int, kMaxPatternSize> pos{};
  std::iota(pos.begin(), pos.begin() + k, 0);

  PatternCode best;
  best.k = static_cast<std::uint8_t>(k);
  bool have_best = false;
  std::uint32_t ties = 0;
  std::array<AttrId, kMaxPatternSize> tuple{};
  do {
    std::uint32_t bits = 0;
    for (int e = 0; e < m; ++e) {
      int a = pos[edge_list[e].first], b = pos[edge_list[e].second];
      if (a > b) std::swap(a, b);
      bits |= 1u << pair_index(a, b);
    }
    if (have_best && bits > best.topo_bits) continue;
    tuple.fill(0);
    for (int v = 0; v < k; ++v) tuple[pos[v]] = attrs[v];
    if (!have_best || bits < best.topo_bits || tuple < best.attrs) {
      best.topo_bits = bits;
      best.attrs = tuple;
      have_best = true;
      ties = 1;
    } else if (tuple == best.attrs) {
      ++ties;
    }
  } while (std::next_permutation(pos.begin(), pos.begin() + k));
  best.aut_count = ties;
  return best;
}

PatternCode canonical_code(int k, std::uint32_t adj_bits) {
  std::array<AttrId, kMaxPatternSize> zeros{};
  if (k < 1 || k > kMaxPatternSize) return canonical_code(k, adj_bits, {});
  return canonical_code(k, adj_bits, std::span<const AttrId>(zeros.data(), k));
}

std::uint32_t induced_bits(const Graph& g, std::span<const VertexId> vertices) {
  std::uint32_t bits = 0;
  for (std::size_t j = 1; j < vertices.size(); ++j)
    for (std::size_t i = 0; i < j; ++i)
      if (g.has_edge(vertices[i], vertices[j]))
        bits |= 1u << pair_index(static_cast<int>(i), static_cast<int>(j));
  return bits;
}

}  // namespace ginv
