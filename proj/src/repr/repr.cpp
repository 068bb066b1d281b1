#include "ginv/repr.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <numeric>
#include <tuple>

#include "ginv/errors.hpp"

namespace ginv {

PatternDensities to_pattern_densities(const DensityVector& dv) { return PatternDensities{dv.entries}; }

PatternDensities assemble_le_k(std::span<const DensityVector> per_k) {
  std::vector<const DensityVector*> sorted;
  for (const auto& dv : per_k) sorted.push_back(&dv);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->k < b->k; });
  PatternDensities out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i]->k == sorted[i - 1]->k) {
      throw ConfigError("assemble_le_k: size " + std::to_string(sorted[i]->k) + " supplied twice");
    }
    if (sorted[i]->norm != sorted[0]->norm) throw ConfigError("assemble_le_k: mixed normalizations");
    out.entries.insert(out.entries.end(), sorted[i]->entries.begin(), sorted[i]->entries.end());
  }
  return out;
}

DensityTable make_density_table(std::span<const PatternDensities> graphs) {
  DensityTable table;
  for (const auto& g : graphs)
    for (const auto& e : g.entries) table.patterns.push_back(e.code);
  std::sort(table.patterns.begin(), table.patterns.end());
  table.patterns.erase(std::unique(table.patterns.begin(), table.patterns.end()), table.patterns.end());
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    for (const auto& e : graphs[gi].entries) {
      const auto it = std::lower_bound(table.patterns.begin(), table.patterns.end(), e.code);
      trip.emplace_back(static_cast<Eigen::Index>(gi), static_cast<Eigen::Index>(it - table.patterns.begin()),
                        e.density);
    }
  }
  auto d = std::make_shared<SpMat>(static_cast<Eigen::Index>(graphs.size()),
                                   static_cast<Eigen::Index>(table.patterns.size()));
  d->setFromTriplets(trip.begin(), trip.end());
  table.densities = std::move(d);
  return table;
}

Mat gamma_from_readouts(const SpMat& densities, const Mat& readouts) {
  if (densities.cols() != readouts.rows()) {
    throw ShapeMismatch("gamma: " + std::to_string(densities.cols()) + " patterns but " +
                        std::to_string(readouts.rows()) + " readouts");
  }
  return densities * readouts;
}

// ---------------------------------------------------------------------------
// Encoders

SubgraphEncoder::SubgraphEncoder(EncoderKind kind, int attr_dim, int max_k, int hidden, int layers,
                                 RngStream& rng)
    : kind_(kind), attr_dim_(attr_dim), max_k_(max_k) {
  if (attr_dim < 1) throw ConfigError("encoder attribute dimension must be >= 1");
  if (max_k < 1 || max_k > kMaxPatternSize) throw ConfigError("encoder pattern size out of range");
  gin_ = GinNetwork("encoder", feature_dim(), hidden, layers, rng);
}

void SubgraphEncoder::fill_features(Mat& features, std::size_t row, AttrId attr, int position) const {
  const auto r = static_cast<Eigen::Index>(row);
  features.row(r).setZero();
  if (attr < attr_dim_) features(r, attr) = 1.0;
  if (kind_ == EncoderKind::kGinPlus) features(r, attr_dim_ + position) = 1.0;
}

EncoderBatch SubgraphEncoder::prepare(std::span<const PatternCode> patterns) const {
  EncoderBatch batch;
  batch.num_patterns = patterns.size();
  std::vector<Eigen::Triplet<double>> adj, pool;
  std::size_t row = 0;

  struct Copy {
    std::uint32_t bits;
    std::array<AttrId, kMaxPatternSize> attrs;
    std::array<std::uint8_t, kMaxPatternSize> source;  // position -> pattern vertex
  };
  std::vector<Copy> copies;

  for (std::size_t pi = 0; pi < patterns.size(); ++pi) {
    const PatternCode& p = patterns[pi];
    const int k = p.k;
    if (k < 1 || k > max_k_) {
      throw ShapeMismatch("pattern of size " + std::to_string(k) + " exceeds encoder size " + std::to_string(max_k_));
    }
    copies.clear();
    if (kind_ == EncoderKind::kGin) {
      Copy c{p.topo_bits, p.attrs, {}};
      std::iota(c.source.begin(), c.source.begin() + k, 0);
      copies.push_back(c);
    } else {
      std::array<std::uint8_t, kMaxPatternSize> perm{};  // pattern vertex -> position
      std::iota(perm.begin(), perm.begin() + k, 0);
      do {
        Copy c{0, {}, {}};
        for (int u = 0; u < k; ++u) {
          c.attrs[perm[u]] = p.attrs[u];
          c.source[perm[u]] = static_cast<std::uint8_t>(u);
          for (int v = u + 1; v < k; ++v) {
            if (p.has_edge(u, v)) {
              const int a = std::min(perm[u], perm[v]), b = std::max(perm[u], perm[v]);
              c.bits |= 1u << pair_index(a, b);
            }
          }
        }
        copies.push_back(c);
      } while (std::next_permutation(perm.begin(), perm.begin() + k));
      // Labeling-independent visiting order of the orbit.
      std::stable_sort(copies.begin(), copies.end(), [](const Copy& x, const Copy& y) {
        return std::tie(x.bits, x.attrs) < std::tie(y.bits, y.attrs);
      });
    }
    const double weight = 1.0 / static_cast<double>(copies.size());
    for (const Copy& c : copies) {
      for (int i = 0; i < k; ++i) {
        const auto r = static_cast<Eigen::Index>(row + i);
        adj.emplace_back(r, r, 1.0);
        pool.emplace_back(static_cast<Eigen::Index>(pi), r, weight);
        for (int j = 0; j < k; ++j) {
          if (i != j && ((c.bits >> pair_index(std::min(i, j), std::max(i, j))) & 1u)) {
            adj.emplace_back(r, static_cast<Eigen::Index>(row + j), 1.0);
          }
        }
        batch.vertex_pattern.push_back(static_cast<std::uint32_t>(pi));
        batch.vertex_source.push_back(c.source[i]);
        batch.vertex_position.push_back(static_cast<std::uint8_t>(i));
      }
      row += k;
    }
  }
  batch.features = Mat::Zero(static_cast<Eigen::Index>(row), feature_dim());
  for (std::size_t r = 0; r < row; ++r) {
    const PatternCode& p = patterns[batch.vertex_pattern[r]];
    fill_features(batch.features, r, p.attrs[batch.vertex_source[r]], batch.vertex_position[r]);
  }
  auto a = std::make_shared<SpMat>(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(row));
  a->setFromTriplets(adj.begin(), adj.end());
  auto pl = std::make_shared<SpMat>(static_cast<Eigen::Index>(patterns.size()), static_cast<Eigen::Index>(row));
  pl->setFromTriplets(pool.begin(), pool.end());
  batch.adj_plus_identity = std::move(a);
  batch.pool = std::move(pl);
  return batch;
}

void SubgraphEncoder::set_attributes(EncoderBatch& batch,
                                     std::span<const std::array<AttrId, kMaxPatternSize>> attrs) const {
  if (attrs.size() != batch.num_patterns) throw ShapeMismatch("set_attributes: wrong number of patterns");
  for (std::size_t r = 0; r < batch.vertex_pattern.size(); ++r) {
    fill_features(batch.features, r, attrs[batch.vertex_pattern[r]][batch.vertex_source[r]],
                  batch.vertex_position[r]);
  }
}

Var SubgraphEncoder::readouts(Tape& tape, const EncoderBatch& batch) {
  Var h = gin_.forward(tape, batch.adj_plus_identity, tape.constant(batch.features));
  return tape.spmm(batch.pool, h);
}

std::vector<Parameter*> SubgraphEncoder::parameters() {
  std::vector<Parameter*> out;
  gin_.collect(out);
  return out;
}

// ---------------------------------------------------------------------------
// Frozen vocabulary

Vocabulary frozen_vocabulary(std::span<const PatternDensities> graphs, std::size_t cap) {
  std::map<PatternCode, std::size_t> occurrences;
  for (const auto& g : graphs)
    for (const auto& e : g.entries)
      if (e.density > 0.0) ++occurrences[e.code];
  std::vector<std::pair<PatternCode, std::size_t>> ranked(occurrences.begin(), occurrences.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > cap) ranked.resize(cap);
  std::vector<PatternCode> codes;
  for (const auto& [code, n] : ranked) codes.push_back(code);
  return Vocabulary(std::move(codes));
}

std::shared_ptr<const SpMat> vocabulary_density_matrix(std::span<const PatternDensities> graphs,
                                                       const Vocabulary& vocab, std::size_t* dropped) {
  std::vector<Eigen::Triplet<double>> trip;
  std::size_t missing = 0;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    for (const auto& e : graphs[gi].entries) {
      if (auto idx = vocab.find(e.code)) {
        trip.emplace_back(static_cast<Eigen::Index>(gi), static_cast<Eigen::Index>(*idx), e.density);
      } else if (e.density > 0.0) {
        ++missing;
      }
    }
  }
  auto d = std::make_shared<SpMat>(static_cast<Eigen::Index>(graphs.size()), static_cast<Eigen::Index>(vocab.size()));
  d->setFromTriplets(trip.begin(), trip.end());
  if (dropped) *dropped = missing;
  return d;
}

// ---------------------------------------------------------------------------
// Regularizer

Var attr_regularizer(Tape& tape, SubgraphEncoder& enc, const EncoderBatch& f_batch, Var readouts_f,
                     std::span<const PatternCode> patterns, std::span<const AttrId> alphabet,
                     int samples_per_pattern, RngStream& rng) {
  if (alphabet.empty()) throw ConfigError("regularizer alphabet must be nonempty");
  if (samples_per_pattern < 1) throw ConfigError("regularizer needs at least one sample per pattern");
  if (patterns.size() != f_batch.num_patterns || static_cast<std::size_t>(readouts_f.rows()) != patterns.size()) {
    throw ShapeMismatch("regularizer: pattern list, batch and readouts disagree");
  }
  if (patterns.empty()) return tape.constant(Mat::Zero(1, 1));
  Var total;
  std::vector<std::array<AttrId, kMaxPatternSize>> attrs(patterns.size());
  for (int s = 0; s < samples_per_pattern; ++s) {
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      attrs[i] = {};
      for (int v = 0; v < patterns[i].k; ++v) attrs[i][v] = alphabet[rng.below(alphabet.size())];
    }
    EncoderBatch h_batch = f_batch;
    enc.set_attributes(h_batch, attrs);
    Var r_h = enc.readouts(tape, h_batch);
    Var dist = tape.sum(tape.row_l2_norms(tape.sub(readouts_f, r_h)));
    total = total.valid() ? tape.add(total, dist) : dist;
  }
  return tape.scale(total, 1.0 / static_cast<double>(patterns.size() * samples_per_pattern));
}

// ---------------------------------------------------------------------------
// Models

const char* repr_kind_name(ReprKind k) {
  switch (k) {
    case ReprKind::kOneHot: return "one_hot";
    case ReprKind::kGin: return "gin";
    case ReprKind::kGinPlus: return "gin_plus";
    case ReprKind::kGinBaseline: return "gin_baseline";
  }
  return "unknown";
}

ReprKind parse_repr_kind(const std::string& s) {
  if (s == "one_hot") return ReprKind::kOneHot;
  if (s == "gin") return ReprKind::kGin;
  if (s == "gin_plus") return ReprKind::kGinPlus;
  if (s == "gin_baseline") return ReprKind::kGinBaseline;
  throw ConfigError("model.representation: expected one_hot, gin, gin_plus or gin_baseline, got \"" + s + "\"");
}

DensityModel::DensityModel(const ModelSpec& spec, Vocabulary vocab, RngStream& rng)
    : spec_(spec), vocab_(std::move(vocab)) {
  switch (spec.kind) {
    case ReprKind::kOneHot: {
      if (vocab_.empty()) throw DataError("one-hot representation needs a nonempty vocabulary");
      Mat w(static_cast<Eigen::Index>(vocab_.size()), spec.hidden);
      const double scale = std::sqrt(2.0 / static_cast<double>(vocab_.size()));
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.normal() * scale;
      embedding_ = Parameter("embedding", std::move(w));
      break;
    }
    case ReprKind::kGin:
    case ReprKind::kGinPlus:
      encoder_ = SubgraphEncoder(spec.kind == ReprKind::kGin ? EncoderKind::kGin : EncoderKind::kGinPlus,
                                 spec.attr_dim, spec.max_k, spec.hidden, spec.layers, rng);
      break;
    case ReprKind::kGinBaseline:
      throw ConfigError("the whole-graph GIN baseline is not a density model");
  }
  std::vector<int> dims{spec.hidden};
  for (int i = 0; i < spec.classifier_hidden_layers; ++i) dims.push_back(spec.hidden);
  dims.push_back(spec.num_classes);
  classifier_ = Mlp("classifier", dims, rng);
}

DensityModel::Input DensityModel::prepare(std::span<const PatternDensities> graphs) const {
  Input in;
  in.num_graphs = graphs.size();
  if (spec_.kind == ReprKind::kOneHot) {
    in.densities = vocabulary_density_matrix(graphs, vocab_, &in.dropped_patterns);
    return in;
  }
  DensityTable table = make_density_table(graphs);
  in.densities = table.densities;
  in.patterns = std::move(table.patterns);
  in.batch = encoder_.prepare(in.patterns);
  return in;
}

Var DensityModel::representation(Tape& tape, const Input& input) {
  if (spec_.kind == ReprKind::kOneHot) return tape.spmm(input.densities, tape.param(embedding_));
  Var r = encoder_.readouts(tape, input.batch);
  last_tape_ = &tape;
  last_input_ = &input;
  last_readouts_ = r;
  return tape.spmm(input.densities, r);
}

Var DensityModel::logits(Tape& tape, const Input& input) {
  return classifier_.forward(tape, representation(tape, input));
}

Var DensityModel::penalty(Tape& tape, const Input& train, RngStream& rng) {
  if (spec_.kind == ReprKind::kOneHot) return tape.constant(Mat::Zero(1, 1));
  Var readouts_f;
  if (last_tape_ == &tape && last_input_ != nullptr) {
    const auto& all = last_input_->patterns;
    std::vector<Eigen::Triplet<double>> trip;
    bool covered = true;
    for (std::size_t i = 0; i < train.patterns.size() && covered; ++i) {
      auto it = std::lower_bound(all.begin(), all.end(), train.patterns[i]);
      covered = it != all.end() && *it == train.patterns[i];
      if (covered) trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(it - all.begin()), 1.0);
    }
    if (covered) {
      auto sel = std::make_shared<SpMat>(static_cast<Eigen::Index>(train.patterns.size()),
                                         static_cast<Eigen::Index>(all.size()));
      sel->setFromTriplets(trip.begin(), trip.end());
      readouts_f = tape.spmm(sel, last_readouts_);
    }
  }
  if (!readouts_f.valid()) readouts_f = encoder_.readouts(tape, train.batch);
  return attr_regularizer(tape, encoder_, train.batch, readouts_f, train.patterns, spec_.alphabet,
                          spec_.reg_samples_per_pattern, rng);
}

std::vector<Parameter*> DensityModel::parameters() {
  std::vector<Parameter*> out;
  if (spec_.kind == ReprKind::kOneHot) {
    out.push_back(&embedding_);
  } else {
    auto enc = encoder_.parameters();
    out.insert(out.end(), enc.begin(), enc.end());
  }
  classifier_.collect(out);
  return out;
}

}  // namespace ginv
