#include <gtest/gtest.h>

#include <cmath>

#include "ginv/census.hpp"
#include "ginv/errors.hpp"
#include "ginv/repr.hpp"
#include "oracles.hpp"

using namespace ginv;

namespace {

Graph cycle(std::uint32_t n) {
  std::vector<Edge> e;
  for (std::uint32_t i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph(n, e);
}

PatternCode labeled(int k, std::initializer_list<std::pair<int, int>> edges, std::vector<AttrId> attrs = {}) {
  PatternCode c;
  c.k = static_cast<std::uint8_t>(k);
  for (auto [i, j] : edges) c.topo_bits |= 1u << pair_index(std::min(i, j), std::max(i, j));
  for (std::size_t i = 0; i < attrs.size(); ++i) c.attrs[i] = attrs[i];
  return c;
}

Mat readouts(SubgraphEncoder& enc, std::span<const PatternCode> patterns) {
  Tape t;
  return enc.readouts(t, enc.prepare(patterns)).value();
}

// Plain-loop GIN over one labeled pattern with parameters read from `params`
// (layer-major: w0, b0, w1, b1 per layer) and one-hot attribute inputs.
std::vector<double> scalar_gin(const std::vector<Parameter*>& params, const PatternCode& p, int attr_dim,
                               const std::array<AttrId, kMaxPatternSize>& attrs) {
  const int k = p.k;
  std::vector<std::vector<double>> h(k, std::vector<double>(attr_dim, 0.0));
  for (int v = 0; v < k; ++v)
    if (attrs[v] < attr_dim) h[v][attrs[v]] = 1.0;
  const std::size_t layers = params.size() / 4;
  for (std::size_t l = 0; l < layers; ++l) {
    const Mat& w0 = params[4 * l]->value;
    const Mat& b0 = params[4 * l + 1]->value;
    const Mat& w1 = params[4 * l + 2]->value;
    const Mat& b1 = params[4 * l + 3]->value;
    std::vector<std::vector<double>> next(k);
    for (int v = 0; v < k; ++v) {
      std::vector<double> agg = h[v];
      for (int u = 0; u < k; ++u)
        if (u != v && p.has_edge(u, v))
          for (std::size_t c = 0; c < agg.size(); ++c) agg[c] += h[u][c];
      std::vector<double> mid(w0.cols());
      for (Eigen::Index j = 0; j < w0.cols(); ++j) {
        double s = b0(0, j);
        for (Eigen::Index i = 0; i < w0.rows(); ++i) s += agg[i] * w0(i, j);
        mid[j] = std::max(s, 0.0);
      }
      next[v].resize(w1.cols());
      for (Eigen::Index j = 0; j < w1.cols(); ++j) {
        double s = b1(0, j);
        for (Eigen::Index i = 0; i < w1.rows(); ++i) s += mid[i] * w1(i, j);
        next[v][j] = (l + 1 < layers) ? std::max(s, 0.0) : s;
      }
    }
    h = std::move(next);
  }
  std::vector<double> out(h[0].size(), 0.0);
  for (int v = 0; v < k; ++v)
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += h[v][c];
  return out;
}

}  // namespace

TEST(OneHot, SelectsAndDropsRows) {
  auto vocab = enumerate_vocabulary(3, std::vector<AttrId>{0});
  ModelSpec spec;
  spec.kind = ReprKind::kOneHot;
  spec.hidden = 4;
  auto rng = RngStream::derive(1, {});
  DensityModel model(spec, vocab, rng);
  const Mat w = model.parameters()[0]->value;

  auto c5 = to_pattern_densities(exact_census(cycle(5), 3, Norm::kOmega));
  PatternDensities zero;
  PatternDensities unseen{{DensityEntry{canonical_code(4, 0b111000), 1, 1.0}}};
  std::vector<PatternDensities> graphs{c5, zero, unseen};
  auto in = model.prepare(graphs);
  EXPECT_EQ(in.dropped_patterns, 1u);
  Tape t;
  Mat gamma = model.representation(t, in).value();
  const auto p3 = *vocab.find(canonical_code(3, 0b011));
  EXPECT_EQ(gamma.row(0), w.row(static_cast<Eigen::Index>(p3)));
  EXPECT_TRUE(gamma.row(1).isZero());
  EXPECT_TRUE(gamma.row(2).isZero());
  // The one-hot model equals the readout formula with the embedding rows
  // used as a frozen per-pattern lookup.
  EXPECT_EQ(gamma, gamma_from_readouts(*in.densities, w));
}

TEST(OneHot, FrozenVocabularyKeepsMostFrequent) {
  const auto a = canonical_code(3, 0b011), b = canonical_code(3, 0b111), c = canonical_code(2, 0b1);
  std::vector<PatternDensities> graphs{
      {{DensityEntry{a, 1, 0.5}, DensityEntry{b, 1, 0.5}}},
      {{DensityEntry{b, 1, 1.0}}},
      {{DensityEntry{c, 1, 1.0}, DensityEntry{b, 1, 0.0}}},
  };
  auto v = frozen_vocabulary(graphs, 1);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], b);
  EXPECT_EQ(frozen_vocabulary(graphs, 10).size(), 3u);
}

TEST(GammaGnn, LinearInDensitiesAndFunctionOfDensitiesOnly) {
  std::mt19937_64 gen(3);
  Graph g = oracle::random_graph(gen, 15, 0.3, 2);
  auto dv = exact_census(g, 4, Norm::kOmega);
  std::vector<PatternDensities> graphs{to_pattern_densities(dv), to_pattern_densities(dv),
                                       to_pattern_densities(dv.scaled(2.5))};
  ModelSpec spec;
  spec.kind = ReprKind::kGin;
  spec.attr_dim = 2;
  spec.max_k = 4;
  spec.hidden = 8;
  auto rng = RngStream::derive(2, {});
  DensityModel model(spec, Vocabulary{}, rng);
  auto in = model.prepare(graphs);
  Tape t;
  Mat gamma = model.representation(t, in).value();
  EXPECT_EQ(gamma.row(0), gamma.row(1));
  EXPECT_LT((gamma.row(2) - 2.5 * gamma.row(0)).cwiseAbs().maxCoeff(), 1e-12);

  // Single pattern with density 1 gives its readout.
  SubgraphEncoder& enc = model.encoder();
  std::vector<PatternCode> one{dv.entries[0].code};
  std::vector<PatternDensities> single{{{DensityEntry{one[0], 1, 1.0}}}};
  auto in1 = model.prepare(single);
  Tape t1;
  EXPECT_LT((model.representation(t1, in1).value() - readouts(enc, one)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(GinPlus, RelabeledPatternIsBitIdentical) {
  auto rng = RngStream::derive(3, {});
  SubgraphEncoder enc(EncoderKind::kGinPlus, 3, 5, 8, 2, rng);
  // A 5-vertex pattern in two different vertex orders.
  std::vector<PatternCode> a{labeled(5, {{0, 1}, {1, 2}, {2, 3}, {1, 4}, {3, 4}}, {0, 1, 2, 1, 0})};
  // Relabel by v -> (v + 2) mod 5.
  auto r = [](int v) { return (v + 2) % 5; };
  std::vector<PatternCode> b{labeled(5, {{r(0), r(1)}, {r(1), r(2)}, {r(2), r(3)}, {r(1), r(4)}, {r(3), r(4)}}, {})};
  for (int v = 0; v < 5; ++v) b[0].attrs[r(v)] = a[0].attrs[v];
  EXPECT_EQ(readouts(enc, a), readouts(enc, b));
}

TEST(GinPlus, SeparatesPatternsPlainGinConfuses) {
  // Complements of C7 and of C3+C4: both connected and 4-regular on 7 vertices.
  auto complement = [](std::initializer_list<std::pair<int, int>> missing) {
    PatternCode c;
    c.k = 7;
    for (int j = 1; j < 7; ++j)
      for (int i = 0; i < j; ++i) c.topo_bits |= 1u << pair_index(i, j);
    for (auto [i, j] : missing) c.topo_bits &= ~(1u << pair_index(std::min(i, j), std::max(i, j)));
    return c;
  };
  auto a = complement({{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 0}});
  auto b = complement({{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 6}, {6, 3}});
  std::vector<PatternCode> pats{a, b};
  auto r1 = RngStream::derive(4, {});
  SubgraphEncoder gin(EncoderKind::kGin, 1, 7, 16, 2, r1);
  Mat g = readouts(gin, pats);
  EXPECT_LT((g.row(0) - g.row(1)).cwiseAbs().maxCoeff(), 1e-9);
  auto r2 = RngStream::derive(4, {});
  SubgraphEncoder plus(EncoderKind::kGinPlus, 1, 7, 16, 2, r2);
  Mat p = readouts(plus, pats);
  EXPECT_GT((p.row(0) - p.row(1)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GammaGnnPlus, MultiplicativeBiasIsAbsorbed) {
  std::mt19937_64 gen(21);
  auto rng = RngStream::derive(5, {});
  SubgraphEncoder enc(EncoderKind::kGinPlus, 2, 4, 8, 2, rng);
  std::vector<PatternDensities> graphs;
  for (int i = 0; i < 4; ++i) graphs.push_back(to_pattern_densities(exact_census(oracle::random_graph(gen, 12, 0.35, 2), 4, Norm::kOmega)));
  auto table = make_density_table(graphs);
  const Mat r = readouts(enc, table.patterns);
  const Mat base = gamma_from_readouts(*table.densities, r);
  auto beta_rng = RngStream::derive(6, {});
  std::vector<double> beta(table.patterns.size());
  for (auto& b : beta) b = 0.5 + 1.5 * beta_rng.uniform();
  SpMat scaled = *table.densities;
  Mat r_scaled = r;
  for (int k = 0; k < scaled.outerSize(); ++k)
    for (SpMat::InnerIterator it(scaled, k); it; ++it) it.valueRef() *= beta[it.col()];
  for (std::size_t j = 0; j < beta.size(); ++j) r_scaled.row(static_cast<Eigen::Index>(j)) /= beta[j];
  EXPECT_LT((gamma_from_readouts(scaled, r_scaled) - base).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Regularizer, SingleColorAlphabetGivesZero) {
  auto rng = RngStream::derive(7, {});
  SubgraphEncoder enc(EncoderKind::kGin, 2, 3, 8, 2, rng);
  std::vector<PatternCode> pats{canonical_code(3, 0b011), canonical_code(3, 0b111)};
  auto batch = enc.prepare(pats);
  Tape t;
  Var r = enc.readouts(t, batch);
  auto srng = RngStream::derive(1, {});
  std::vector<AttrId> alphabet{0};
  EXPECT_EQ(attr_regularizer(t, enc, batch, r, pats, alphabet, 1, srng).scalar(), 0.0);
}

TEST(Regularizer, AttributeBlindEncoderGivesZero) {
  auto rng = RngStream::derive(8, {});
  SubgraphEncoder enc(EncoderKind::kGin, 2, 3, 8, 2, rng);
  // Make the first layer read both attribute channels identically, so the
  // encoder sees only topology.
  Mat& w = enc.parameters()[0]->value;
  w.row(1) = w.row(0);
  std::vector<PatternCode> pats{canonical_code(3, 0b011, std::vector<AttrId>{0, 1, 1}),
                                canonical_code(3, 0b111, std::vector<AttrId>{0, 0, 1})};
  auto batch = enc.prepare(pats);
  Tape t;
  Var r = enc.readouts(t, batch);
  auto srng = RngStream::derive(2, {});
  std::vector<AttrId> alphabet{0, 1};
  EXPECT_LT(attr_regularizer(t, enc, batch, r, pats, alphabet, 3, srng).scalar(), 1e-12);
}

TEST(Regularizer, MatchesScalarRecomputation) {
  auto rng = RngStream::derive(9, {});
  SubgraphEncoder enc(EncoderKind::kGin, 2, 3, 6, 2, rng);
  std::vector<PatternCode> pats{canonical_code(3, 0b011, std::vector<AttrId>{1, 0, 0}),
                                canonical_code(3, 0b111, std::vector<AttrId>{0, 1, 1})};
  auto batch = enc.prepare(pats);
  Tape t;
  Var r = enc.readouts(t, batch);
  std::vector<AttrId> alphabet{0, 1};
  auto srng = RngStream::derive(3, {});
  const double got = attr_regularizer(t, enc, batch, r, pats, alphabet, 1, srng).scalar();

  // Replay the same draws and recompute every readout with plain loops.
  auto replay = RngStream::derive(3, {});
  const auto params = enc.parameters();
  double expected = 0.0;
  for (const auto& p : pats) {
    std::array<AttrId, kMaxPatternSize> h{};
    for (int v = 0; v < p.k; ++v) h[v] = alphabet[replay.below(alphabet.size())];
    auto rf = scalar_gin(params, p, 2, p.attrs);
    auto rh = scalar_gin(params, p, 2, h);
    double sq = 0.0;
    for (std::size_t c = 0; c < rf.size(); ++c) sq += (rf[c] - rh[c]) * (rf[c] - rh[c]);
    expected += std::sqrt(sq);
  }
  expected /= static_cast<double>(pats.size());
  EXPECT_NEAR(got, expected, 1e-12);
  EXPECT_GE(got, 0.0);
}

TEST(AssembleLeK, ConcatenatesInAscendingK) {
  std::mt19937_64 gen(4);
  Graph g = oracle::random_graph(gen, 10, 0.4, 0);
  auto d3 = exact_census(g, 3, Norm::kOmega);
  auto d4 = exact_census(g, 4, Norm::kOmega);
  std::vector<DensityVector> one{d3};
  EXPECT_EQ(assemble_le_k(one).entries.size(), d3.entries.size());
  std::vector<DensityVector> both{d4, d3};
  auto a = assemble_le_k(both);
  std::vector<DensityEntry> manual = d3.entries;
  manual.insert(manual.end(), d4.entries.begin(), d4.entries.end());
  ASSERT_EQ(a.entries.size(), manual.size());
  for (std::size_t i = 0; i < manual.size(); ++i) {
    EXPECT_EQ(a.entries[i].code, manual[i].code);
    EXPECT_EQ(a.entries[i].density, manual[i].density);
  }
  auto b = assemble_le_k(both);
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].code, b.entries[i].code);
  std::vector<DensityVector> mixed{d3, exact_census(g, 4, Norm::kTInd)};
  EXPECT_THROW(assemble_le_k(mixed), ConfigError);
}
