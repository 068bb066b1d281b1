#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ginv/autodiff.hpp"
#include "ginv/census.hpp"
#include "ginv/nn.hpp"
#include "ginv/pattern.hpp"
#include "ginv/vocabulary.hpp"

namespace ginv {

// Densities of one graph over patterns of one or more sizes, ordered by
// ascending k and then by code.
struct PatternDensities {
  std::vector<DensityEntry> entries;
};

PatternDensities to_pattern_densities(const DensityVector& dv);

// Concatenates per-size density vectors in ascending k. Every block keeps its
// own normalization. Throws ConfigError on mixed norms or repeated sizes.
PatternDensities assemble_le_k(std::span<const DensityVector> per_k);

// Sparse graphs x patterns density matrix over the distinct patterns of a set
// of graphs.
struct DensityTable {
  std::vector<PatternCode> patterns;  // sorted, unique
  std::shared_ptr<const SpMat> densities;
};

DensityTable make_density_table(std::span<const PatternDensities> graphs);

// Γ = D R for a density matrix D and per-pattern readouts R.
Mat gamma_from_readouts(const SpMat& densities, const Mat& readouts);

// ---------------------------------------------------------------------------
// Pattern encoders

enum class EncoderKind { kGin, kGinPlus };

// Pattern graphs prepared for one encoder pass. Row i of the pooled output is
// the readout of patterns[i].
struct EncoderBatch {
  std::size_t num_patterns = 0;
  std::shared_ptr<const SpMat> adj_plus_identity;
  std::shared_ptr<const SpMat> pool;
  Mat features;
  // For every vertex row: the pattern it belongs to, the pattern vertex it
  // copies and its position id. Used to redraw attributes on the same
  // topology without rebuilding the sparse structure.
  std::vector<std::uint32_t> vertex_pattern;
  std::vector<std::uint8_t> vertex_source;
  std::vector<std::uint8_t> vertex_position;
};

// GIN over a pattern with sum readout. The GIN+ variant appends a one-hot
// position id to each vertex and averages the readout over every ordering of
// the vertices; the orderings are visited in a labeling-independent order so
// relabeled inputs give bit-identical outputs.
class SubgraphEncoder {
 public:
  SubgraphEncoder() = default;
  // attr_dim >= 1: vertex attribute ids >= attr_dim get a zero attribute row.
  SubgraphEncoder(EncoderKind kind, int attr_dim, int max_k, int hidden, int layers, RngStream& rng);

  EncoderBatch prepare(std::span<const PatternCode> patterns) const;
  // Same batch with vertex attributes replaced; attrs[i] is the attribute
  // tuple for patterns[i] in that pattern's vertex order.
  void set_attributes(EncoderBatch& batch, std::span<const std::array<AttrId, kMaxPatternSize>> attrs) const;
  Var readouts(Tape& tape, const EncoderBatch& batch);

  std::vector<Parameter*> parameters();
  EncoderKind kind() const { return kind_; }
  int attr_dim() const { return attr_dim_; }
  int max_k() const { return max_k_; }
  int out_dim() const { return gin_.out_dim(); }
  GinNetwork& network() { return gin_; }

 private:
  int feature_dim() const { return attr_dim_ + (kind_ == EncoderKind::kGinPlus ? max_k_ : 0); }
  void fill_features(Mat& features, std::size_t row, AttrId attr, int position) const;

  EncoderKind kind_ = EncoderKind::kGin;
  int attr_dim_ = 1;
  int max_k_ = 5;
  GinNetwork gin_;
};

// ---------------------------------------------------------------------------
// Frozen one-hot vocabulary

// Keeps the `cap` patterns that occur in the most graphs (ties by code).
Vocabulary frozen_vocabulary(std::span<const PatternDensities> graphs, std::size_t cap);

// Projects densities onto a frozen vocabulary. Patterns outside it are
// dropped and counted in *dropped.
std::shared_ptr<const SpMat> vocabulary_density_matrix(std::span<const PatternDensities> graphs,
                                                       const Vocabulary& vocab, std::size_t* dropped);

// ---------------------------------------------------------------------------
// Attribute-equivalence regularizer

// For each pattern F in `patterns` (readout rows of `readouts_f`), draws
// `samples_per_pattern` reassignments H with attributes uniform over
// `alphabet` on F's labeled topology and returns the mean of
// ||r(F) - r(H)||_2 over all pairs.
Var attr_regularizer(Tape& tape, SubgraphEncoder& enc, const EncoderBatch& f_batch, Var readouts_f,
                     std::span<const PatternCode> patterns, std::span<const AttrId> alphabet,
                     int samples_per_pattern, RngStream& rng);

// ---------------------------------------------------------------------------
// Models

enum class ReprKind { kOneHot, kGin, kGinPlus, kGinBaseline };

const char* repr_kind_name(ReprKind k);
ReprKind parse_repr_kind(const std::string& s);

struct ModelSpec {
  ReprKind kind = ReprKind::kOneHot;
  int hidden = 32;
  int layers = 2;
  int classifier_hidden_layers = 0;
  int num_classes = 2;
  int attr_dim = 1;
  int max_k = 5;
  int reg_samples_per_pattern = 1;
  std::vector<AttrId> alphabet{0};
};

// Γ (one-hot, GIN or GIN+) followed by the classifier.
class DensityModel {
 public:
  struct Input {
    std::size_t num_graphs = 0;
    std::shared_ptr<const SpMat> densities;
    std::vector<PatternCode> patterns;  // encoder kinds only
    EncoderBatch batch;                 // encoder kinds only
    std::size_t dropped_patterns = 0;   // one-hot only
  };

  DensityModel() = default;
  // `vocab` is used by the one-hot kind only.
  DensityModel(const ModelSpec& spec, Vocabulary vocab, RngStream& rng);

  Input prepare(std::span<const PatternDensities> graphs) const;
  Var representation(Tape& tape, const Input& input);
  Var logits(Tape& tape, const Input& input);
  // Regularizer over the patterns of `train` (encoder kinds). When the
  // latest representation() call on the same tape covered every train
  // pattern, its readouts are reused instead of running the encoder again.
  Var penalty(Tape& tape, const Input& train, RngStream& rng);

  std::vector<Parameter*> parameters();
  const ModelSpec& spec() const { return spec_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  SubgraphEncoder& encoder() { return encoder_; }

 private:
  ModelSpec spec_;
  Vocabulary vocab_;
  Parameter embedding_;  // one-hot: |vocab| x hidden
  SubgraphEncoder encoder_;
  Mlp classifier_;
  // Cached readouts of the latest representation() call.
  const Input* last_input_ = nullptr;
  Var last_readouts_;
  Tape* last_tape_ = nullptr;
};

}  // namespace ginv
