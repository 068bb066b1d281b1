#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>

#include "ginv/graph.hpp"

namespace ginv {

inline constexpr int kMaxPatternSize = 8;

// Bit position of the unordered pair (i, j), i < j, in a topology mask.
// Pairs are ordered column-major by the larger index:
// (0,1) (0,2) (1,2) (0,3) (1,3) (2,3) (0,4) ...
constexpr int pair_index(int i, int j) { return j * (j - 1) / 2 + i; }
constexpr int num_pairs(int k) { return k * (k - 1) / 2; }

bool topology_connected(int k, std::uint32_t bits);

// Canonical code of a connected k-vertex attributed pattern. (topo_bits,
// attrs) is the lexicographic minimum over all k! relabelings; aut_count is
// the number of relabelings that fix it.
struct PatternCode {
  std::uint8_t k = 0;
  std::uint32_t topo_bits = 0;
  std::array<AttrId, kMaxPatternSize> attrs{};
  std::uint32_t aut_count = 0;

  std::span<const AttrId> attr_tuple() const { return {attrs.data(), k}; }
  bool has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return (topo_bits >> pair_index(i, j)) & 1u;
  }
  int num_edges() const;

  // Ordering and equality ignore aut_count, which is derived from the rest.
  friend bool operator==(const PatternCode& a, const PatternCode& b) {
    return a.k == b.k && a.topo_bits == b.topo_bits && a.attrs == b.attrs;
  }
  friend std::strong_ordering operator<=>(const PatternCode& a, const PatternCode& b) {
    if (auto c = a.k <=> b.k; c != 0) return c;
    if (auto c = a.topo_bits <=> b.topo_bits; c != 0) return c;
    return a.attrs <=> b.attrs;
  }

  // "k:bits:a0,a1,..." e.g. "3:7:0,0,0" for the triangle.
  std::string to_string() const;
};

struct PatternCodeHash {
  std::size_t operator()(const PatternCode& c) const;
};

// Throws DisconnectedPattern if the pattern is not connected and ConfigError
// if k is outside [1, kMaxPatternSize].
PatternCode canonical_code(int k, std::uint32_t adj_bits, std::span<const AttrId> attrs);

// Unattributed convenience overload (all attributes null).
PatternCode canonical_code(int k, std::uint32_t adj_bits);

// Induced pattern of `vertices` (in the given order) inside g, as a raw
// (non-canonical) topology mask.
std::uint32_t induced_bits(const Graph& g, std::span<const VertexId> vertices);

}  // namespace ginv
