#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ginv/autodiff.hpp"
#include "ginv/graph.hpp"
#include "ginv/rng.hpp"

namespace ginv {

// Affine map x W + b with W of shape in x out.
class Linear {
 public:
  Linear() = default;
  // He-style init: W ~ N(0, 2 / in), b = 0.
  Linear(const std::string& name, int in, int out, RngStream& rng);
  Var forward(Tape& tape, Var x);
  void collect(std::vector<Parameter*>& out);
  int in() const { return static_cast<int>(weight.value.rows()); }
  int out() const { return static_cast<int>(weight.value.cols()); }

  Parameter weight;
  Parameter bias;
};

// Linear layers with ReLU between them and no activation after the last.
class Mlp {
 public:
  Mlp() = default;
  // dims = {in, hidden..., out}.
  Mlp(const std::string& name, const std::vector<int>& dims, RngStream& rng);
  Var forward(Tape& tape, Var x);
  void collect(std::vector<Parameter*>& out);

  std::vector<Linear> layers;
};

struct AdamOptions {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction; consumes and clears Parameter::grad.
class Adam {
 public:
  explicit Adam(AdamOptions opts) : opts_(opts) {}
  void step(const std::vector<Parameter*>& params);
  std::uint64_t steps() const { return t_; }

 private:
  AdamOptions opts_;
  std::uint64_t t_ = 0;
};

// One GIN layer per entry: h <- MLP((A + I) h), MLP = Linear-ReLU-Linear,
// with a ReLU between layers and none after the last.
class GinNetwork {
 public:
  GinNetwork() = default;
  GinNetwork(const std::string& name, int in_dim, int hidden, int layers, RngStream& rng);
  Var forward(Tape& tape, const std::shared_ptr<const SpMat>& adj_plus_identity, Var features);
  void collect(std::vector<Parameter*>& out);
  int out_dim() const { return hidden_; }
  int num_layers() const { return static_cast<int>(mlps_.size()); }
  std::vector<Mlp>& mlps() { return mlps_; }

 private:
  int hidden_ = 0;
  std::vector<Mlp> mlps_;
};

// Disjoint union of graphs prepared for a GIN forward pass.
struct GraphBatch {
  std::shared_ptr<const SpMat> adj_plus_identity;  // total_vertices^2
  std::shared_ptr<const SpMat> pool;               // graphs x total_vertices
  Mat features;                                    // total_vertices x feature_dim
};

// Feature mode: attr_dim == 0 gives the constant feature 1; otherwise a
// one-hot of the vertex attribute (ids >= attr_dim map to a zero row).
GraphBatch make_graph_batch(std::span<const Graph> graphs, int attr_dim);

// Whole-graph GIN with sum readout followed by the classifier MLP.
class GinBaseline {
 public:
  GinBaseline() = default;
  GinBaseline(int in_dim, int hidden, int layers, int classifier_hidden_layers, int num_classes,
              RngStream& rng);
  Var logits(Tape& tape, const GraphBatch& batch);
  std::vector<Parameter*> parameters();

 private:
  GinNetwork gin_;
  Mlp classifier_;
};

// ---------------------------------------------------------------------------
// Metrics

// Argmax per row; ties go to the lowest class id.
std::vector<int> predict(const Mat& logits);

struct Metrics {
  double loss = 0.0;
  double accuracy = 0.0;
  double mcc = 0.0;
  // confusion[true][predicted]
  std::vector<std::vector<std::uint64_t>> confusion;
};

// Multiclass Matthews correlation (Gorodkin's R_K); 0 when undefined.
double matthews_corrcoef(const std::vector<std::vector<std::uint64_t>>& confusion);

Metrics evaluate_logits(const Mat& logits, const std::vector<int>& labels, int num_classes);

// ---------------------------------------------------------------------------
// Training

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double penalty = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainProblem {
  std::vector<Parameter*> params;
  // Logits for the training graphs followed by the validation graphs.
  std::function<Var(Tape&)> logits;
  // Optional penalty added with weight reg_weight. It is called on the same
  // tape right after `logits` and receives a fresh stream per epoch.
  std::function<Var(Tape&, RngStream&)> penalty;
  std::vector<int> train_labels;
  std::vector<int> val_labels;
  int num_classes = 2;
};

struct TrainOptions {
  int epochs = 500;
  double learning_rate = 0.01;
  double reg_weight = 0.0;
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  // 1-based epoch whose starting parameters had the highest validation
  // accuracy (first such epoch on ties). Parameters are restored to it.
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
};

// Full-batch Adam. Epoch e evaluates the parameters it starts with on the
// train and validation splits, snapshots them if validation accuracy strictly
// improves, then takes one optimizer step. Throws NonFiniteLoss.
TrainResult train(TrainProblem& problem, const TrainOptions& opts);

// ---------------------------------------------------------------------------
// Hyperparameters

struct HyperParams {
  double learning_rate = 0.01;
  int hidden = 32;
  int layers = 2;
  double reg_weight = 0.1;
};

struct TrainConfig {
  int epochs = 500;
  std::vector<double> learning_rates{0.1, 0.01, 0.001};
  std::vector<int> hidden{32, 64, 128, 256};
  std::vector<int> layers{1, 2};
  std::vector<double> reg_weights{0.1, 0.15};
  int seeds = 10;
  std::uint64_t base_seed = 0;
  // Hidden layers in the downstream classifier (0 = a single linear layer).
  int classifier_hidden_layers = 0;
  // Attribute reassignments drawn per pattern for the regularizer.
  int reg_samples_per_pattern = 1;
  // Use only the first value of every grid.
  bool reduced_grid = false;
  // Size of the frozen one-hot vocabulary (most frequent patterns first).
  std::size_t vocab_cap = 100000;

  void validate() const;
  std::vector<HyperParams> grid() const;
};

TrainConfig parse_train_config(const nlohmann::json& j);
nlohmann::ordered_json train_config_to_json(const TrainConfig& c);

// Seed of run `index` derived from the base seed.
std::uint64_t run_seed(std::uint64_t base_seed, int index);

}  // namespace ginv
