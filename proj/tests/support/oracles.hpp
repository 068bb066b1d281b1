#pragma once

// Brute-force reference implementations used by unit and acceptance tests.
// They share no code with the library: patterns are keyed by a string
// canonical form computed from an adjacency matrix over all vertex orders.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ginv/graph.hpp"
#include "ginv/pattern.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<int>>;

inline bool connected(const Matrix& adj) {
  const int k = static_cast<int>(adj.size());
  if (k == 0) return false;
  std::vector<int> seen(k, 0), stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < k; ++v) {
      if (adj[u][v] && !seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

// "attrs|adjacency rows" of the pattern read in the given vertex order.
inline std::string label_string(const Matrix& adj, const std::vector<int>& attrs, const std::vector<int>& order) {
  const int k = static_cast<int>(adj.size());
  std::string s;
  for (int i = 0; i < k; ++i) s += std::to_string(attrs[order[i]]) + ",";
  s += "|";
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) s += adj[order[i]][order[j]] ? '1' : '0';
  return s;
}

// Minimum label string over all vertex orders. The minimizing labeled graph
// serves as the fixed representative of the pattern.
inline std::string canonical(const Matrix& adj, const std::vector<int>& attrs) {
  const int k = static_cast<int>(adj.size());
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::string best = label_string(adj, attrs, order);
  while (std::next_permutation(order.begin(), order.end())) best = std::min(best, label_string(adj, attrs, order));
  return best;
}

inline std::string canonical(const ginv::PatternCode& code) {
  Matrix adj(code.k, std::vector<int>(code.k, 0));
  std::vector<int> attrs(code.k);
  for (int i = 0; i < code.k; ++i) {
    attrs[i] = code.attrs[i];
    for (int j = 0; j < code.k; ++j) adj[i][j] = i != j && code.has_edge(i, j);
  }
  return canonical(adj, attrs);
}

// Number of vertex orders that leave the labeled pattern unchanged.
inline std::uint64_t automorphisms(const Matrix& adj, const std::vector<int>& attrs) {
  const int k = static_cast<int>(adj.size());
  std::vector<int> p(k);
  std::iota(p.begin(), p.end(), 0);
  std::uint64_t count = 0;
  do {
    bool same = true;
    for (int i = 0; i < k && same; ++i) {
      if (attrs[p[i]] != attrs[i]) same = false;
      for (int j = 0; j < k && same; ++j) same = adj[p[i]][p[j]] == adj[i][j];
    }
    count += same;
  } while (std::next_permutation(p.begin(), p.end()));
  return count;
}

// Distinct connected patterns on k vertices with the given number of colors,
// found by enumerating every labeled graph and every coloring.
inline std::set<std::string> all_connected_patterns(int k, int colors) {
  std::set<std::string> out;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
  std::uint64_t num_colorings = 1;
  for (int i = 0; i < k; ++i) num_colorings *= colors;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs.size()); ++mask) {
    Matrix adj(k, std::vector<int>(k, 0));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (mask >> p & 1) adj[pairs[p].first][pairs[p].second] = adj[pairs[p].second][pairs[p].first] = 1;
    }
    if (!connected(adj)) continue;
    for (std::uint64_t c = 0; c < num_colorings; ++c) {
      std::vector<int> attrs(k);
      std::uint64_t x = c;
      for (int i = 0; i < k; ++i) {
        attrs[i] = static_cast<int>(x % colors);
        x /= colors;
      }
      out.insert(canonical(adj, attrs));
    }
  }
  return out;
}

struct TupleCount {
  std::uint64_t ordered = 0;  // induced maps of the representative labeled pattern
  std::uint64_t aut = 0;
};

// Visits all n!/(n-k)! ordered tuples of distinct vertices.
inline std::map<std::string, TupleCount> ordered_tuple_census(const ginv::Graph& g, int k,
                                                              std::uint64_t* num_tuples = nullptr) {
  std::map<std::string, TupleCount> out;
  const int n = static_cast<int>(g.n());
  std::vector<int> tuple(k, 0);
  std::vector<int> used(n, 0);
  std::uint64_t tuples = 0;
  auto rec = [&](auto&& self, int depth) -> void {
    if (depth == k) {
      ++tuples;
      Matrix adj(k, std::vector<int>(k, 0));
      std::vector<int> attrs(k);
      for (int i = 0; i < k; ++i) {
        attrs[i] = g.attr(tuple[i]);
        for (int j = 0; j < k; ++j) adj[i][j] = i != j && g.has_edge(tuple[i], tuple[j]);
      }
      if (!connected(adj)) return;
      // The tuple is an induced map of the representative labeled pattern
      // exactly when its own labeling equals the representative.
      auto& entry = out[canonical(adj, attrs)];
      std::vector<int> identity(k);
      std::iota(identity.begin(), identity.end(), 0);
      if (label_string(adj, attrs, identity) == canonical(adj, attrs)) ++entry.ordered;
      entry.aut = automorphisms(adj, attrs);
      return;
    }
    for (int v = 0; v < n; ++v) {
      if (used[v]) continue;
      used[v] = 1;
      tuple[depth] = v;
      self(self, depth + 1);
      used[v] = 0;
    }
  };
  rec(rec, 0);
  if (num_tuples) *num_tuples = tuples;
  return out;
}

// Counts connected induced k-subsets per pattern by visiting every subset.
inline std::map<std::string, std::uint64_t> subset_census(const ginv::Graph& g, int k) {
  std::map<std::string, std::uint64_t> out;
  const int n = static_cast<int>(g.n());
  std::vector<int> pick(k);
  auto rec = [&](auto&& self, int depth, int start) -> void {
    if (depth == k) {
      Matrix adj(k, std::vector<int>(k, 0));
      std::vector<int> attrs(k);
      for (int i = 0; i < k; ++i) {
        attrs[i] = g.attr(pick[i]);
        for (int j = 0; j < k; ++j) adj[i][j] = i != j && g.has_edge(pick[i], pick[j]);
      }
      if (connected(adj)) ++out[canonical(adj, attrs)];
      return;
    }
    for (int v = start; v <= n - (k - depth); ++v) {
      pick[depth] = v;
      self(self, depth + 1, v + 1);
    }
  };
  rec(rec, 0, 0);
  return out;
}

inline ginv::Graph random_graph(std::mt19937_64& rng, std::uint32_t n, double p, int colors) {
  std::bernoulli_distribution edge(p);
  std::vector<ginv::Edge> edges;
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t v = u + 1; v < n; ++v)
      if (edge(rng)) edges.emplace_back(u, v);
  std::optional<std::vector<ginv::AttrId>> attrs;
  if (colors > 0) {
    std::uniform_int_distribution<int> pick(0, colors - 1);
    attrs.emplace(n);
    for (auto& a : *attrs) a = static_cast<ginv::AttrId>(pick(rng));
  }
  return ginv::Graph(n, std::move(edges), std::move(attrs));
}

}  // namespace oracle
