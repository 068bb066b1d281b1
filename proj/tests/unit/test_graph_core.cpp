#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ginv/errors.hpp"
#include "ginv/graph.hpp"
#include "ginv/graph_io.hpp"
#include "ginv/pattern.hpp"
#include "ginv/vocabulary.hpp"
#include "oracles.hpp"

using namespace ginv;

namespace {

std::uint32_t bits_of(int k, std::initializer_list<std::pair<int, int>> edges) {
  std::uint32_t b = 0;
  for (auto [i, j] : edges) b |= 1u << pair_index(std::min(i, j), std::max(i, j));
  (void)k;
  return b;
}

}  // namespace

TEST(Graph, NormalizesAndQueriesEdges) {
  Graph g(4, {{2, 1}, {0, 3}, {1, 0}});
  EXPECT_EQ(g.num_edges(), 3u);
  EXPECT_EQ(g.edges().front(), (Edge{0, 1}));
  EXPECT_TRUE(g.has_edge(1, 2));
  EXPECT_TRUE(g.has_edge(2, 1));
  EXPECT_FALSE(g.has_edge(2, 3));
  EXPECT_EQ(g.degree(0), 2u);
  EXPECT_EQ(g.attr(0), 0);
}

TEST(Graph, RejectsInvalidInput) {
  EXPECT_THROW(Graph(3, {{1, 1}}), InvariantViolation);
  EXPECT_THROW(Graph(3, {{0, 1}, {1, 0}}), InvariantViolation);
  EXPECT_THROW(Graph(3, {{0, 3}}), InvariantViolation);
  EXPECT_THROW(Graph(3, {}, std::vector<AttrId>{0, 1}), InvariantViolation);
  EXPECT_THROW(Graph(3, {}, std::nullopt, -1), InvariantViolation);
}

TEST(Graph, ContentHashIgnoresLabelAndEdgeOrder) {
  Graph a(3, {{0, 1}, {1, 2}}, std::vector<AttrId>{1, 0, 1}, 0);
  Graph b(3, {{2, 1}, {1, 0}}, std::vector<AttrId>{1, 0, 1}, 1);
  Graph c(3, {{0, 1}, {1, 2}}, std::vector<AttrId>{1, 1, 1}, 0);
  EXPECT_EQ(a.content_hash(), b.content_hash());
  EXPECT_NE(a.content_hash(), c.content_hash());
}

TEST(Graph, PermutedMovesVertices) {
  Graph g(3, {{0, 1}}, std::vector<AttrId>{5, 6, 7});
  std::vector<VertexId> perm{2, 0, 1};
  Graph h = g.permuted(perm);
  EXPECT_TRUE(h.has_edge(2, 0));
  EXPECT_EQ(h.attr(2), 5);
  EXPECT_EQ(h.attr(0), 6);
}

TEST(Pattern, PairIndexIsColumnMajor) {
  EXPECT_EQ(pair_index(0, 1), 0);
  EXPECT_EQ(pair_index(0, 2), 1);
  EXPECT_EQ(pair_index(1, 2), 2);
  EXPECT_EQ(pair_index(0, 3), 3);
  EXPECT_EQ(num_pairs(5), 10);
}

TEST(Pattern, AutomorphismCounts) {
  EXPECT_EQ(canonical_code(3, bits_of(3, {{0, 1}, {1, 2}})).aut_count, 2u);
  EXPECT_EQ(canonical_code(3, bits_of(3, {{0, 1}, {1, 2}, {0, 2}})).aut_count, 6u);
  EXPECT_EQ(canonical_code(4, bits_of(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}})).aut_count, 8u);
  EXPECT_EQ(canonical_code(4, bits_of(4, {{0, 1}, {0, 2}, {0, 3}})).aut_count, 6u);
  const std::uint32_t path = bits_of(3, {{0, 1}, {1, 2}});
  std::vector<AttrId> same_ends{0, 1, 0};
  std::vector<AttrId> diff_ends{0, 1, 1};
  EXPECT_EQ(canonical_code(3, path, same_ends).aut_count, 2u);
  EXPECT_EQ(canonical_code(3, path, diff_ends).aut_count, 1u);
}

TEST(Pattern, CanonicalCodeIsInvariantUnderRelabeling) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 3 + trial % 4;
    Graph g = oracle::random_graph(rng, k, 0.6, 3);
    std::vector<VertexId> all(k);
    std::iota(all.begin(), all.end(), 0);
    const std::uint32_t bits = induced_bits(g, all);
    if (!topology_connected(k, bits)) continue;
    auto code = canonical_code(k, bits, *g.attrs());
    std::vector<VertexId> perm = all;
    std::shuffle(perm.begin(), perm.end(), rng);
    Graph h = g.permuted(perm);
    auto code2 = canonical_code(k, induced_bits(h, all), *h.attrs());
    EXPECT_EQ(code, code2);
    EXPECT_EQ(code.aut_count, code2.aut_count);
    EXPECT_EQ(oracle::canonical(code), oracle::canonical(code2));
  }
}

TEST(Pattern, DisconnectedThrows) {
  EXPECT_THROW(canonical_code(3, bits_of(3, {{0, 1}})), DisconnectedPattern);
  EXPECT_THROW(canonical_code(9, 0), ConfigError);
  EXPECT_NO_THROW(canonical_code(1, 0));
}

TEST(Vocabulary, UnattributedCountsMatchBruteForce) {
  std::vector<AttrId> alphabet{0};
  for (int k = 1; k <= 6; ++k) {
    const auto expected = oracle::all_connected_patterns(k, 1).size();
    EXPECT_EQ(enumerate_vocabulary(k, alphabet).size(), expected) << "k=" << k;
  }
  EXPECT_EQ(enumerate_vocabulary(3, alphabet).size(), 2u);
  EXPECT_EQ(enumerate_vocabulary(4, alphabet).size(), 6u);
  EXPECT_EQ(enumerate_vocabulary(5, alphabet).size(), 21u);
}

TEST(Vocabulary, AttributedCountsMatchBruteForce) {
  for (int colors = 2; colors <= 4; ++colors) {
    std::vector<AttrId> alphabet;
    for (int c = 0; c < colors; ++c) alphabet.push_back(static_cast<AttrId>(c));
    for (int k = 2; k <= (colors == 4 ? 3 : 4); ++k) {
      auto vocab = enumerate_vocabulary(k, alphabet);
      auto expected = oracle::all_connected_patterns(k, colors);
      ASSERT_EQ(vocab.size(), expected.size()) << "k=" << k << " colors=" << colors;
      std::set<std::string> got;
      for (const auto& p : vocab.patterns()) got.insert(oracle::canonical(p));
      EXPECT_EQ(got, expected);
    }
  }
}

TEST(Vocabulary, SortedUniqueAndUpTo) {
  std::vector<AttrId> alphabet{0};
  auto v = enumerate_vocabulary_up_to(5, alphabet);
  EXPECT_EQ(v.size(), 1u + 1u + 2u + 6u + 21u);
  EXPECT_TRUE(std::is_sorted(v.patterns().begin(), v.patterns().end()));
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(*v.find(v[i]), i);
}

TEST(Vocabulary, CapAndEmptyAlphabet) {
  std::vector<AttrId> alphabet{0, 1, 2, 3};
  EXPECT_THROW(enumerate_vocabulary(5, alphabet, 100), VocabularyTooLarge);
  EXPECT_THROW(enumerate_vocabulary(3, std::vector<AttrId>{}), ConfigError);
}

TEST(GraphIo, RoundTripsRandomGraphs) {
  std::mt19937_64 rng(11);
  std::vector<Graph> graphs;
  for (int i = 0; i < 100; ++i) {
    Graph g = oracle::random_graph(rng, 1 + i % 17, 0.3, i % 3 == 0 ? 0 : 4);
    graphs.push_back(i % 2 ? g.with_label(i % 5) : g);
  }
  std::stringstream ss;
  write_graphs(ss, graphs);
  std::string first = ss.str();
  auto back = read_graphs(ss);
  EXPECT_EQ(back, graphs);
  std::stringstream again;
  write_graphs(again, back);
  EXPECT_EQ(again.str(), first);
}

TEST(GraphIo, ReportsLineNumbers) {
  std::stringstream ss("{\"n\":2,\"edges\":[[0,1]]}\n\n{\"n\":2,\"edges\":[[0,\n");
  try {
    read_graphs(ss);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::stringstream bad("{\"n\":2,\"edges\":[[0,2]]}\n");
  EXPECT_THROW(read_graphs(bad), InvariantViolation);
}
