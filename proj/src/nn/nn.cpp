#include "ginv/nn.hpp"

#include <cmath>
#include <algorithm>
#include <sstream>

#include "ginv/errors.hpp"

namespace ginv {

// ---------------------------------------------------------------------------
// Layers

Linear::Linear(const std::string& name, int in, int out, RngStream& rng) {
  if (in < 1 || out < 1) throw ConfigError("layer " + name + " needs positive dimensions");
  Mat w(in, out);
  const double scale = std::sqrt(2.0 / in);
  for (Eigen::Index c = 0; c < w.cols(); ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.normal() * scale;
  weight = Parameter(name + ".weight", std::move(w));
  bias = Parameter(name + ".bias", Mat::Zero(1, out));
}

Var Linear::forward(Tape& tape, Var x) {
  return tape.add(tape.matmul(x, tape.param(weight)), tape.param(bias));
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

Mlp::Mlp(const std::string& name, const std::vector<int>& dims, RngStream& rng) {
  if (dims.size() < 2) throw ConfigError("MLP " + name + " needs at least an input and an output size");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers.emplace_back(name + "." + std::to_string(i), dims[i], dims[i + 1], rng);
  }
}

Var Mlp::forward(Tape& tape, Var x) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i].forward(tape, x);
    if (i + 1 < layers.size()) x = tape.relu(x);
  }
  return x;
}

void Mlp::collect(std::vector<Parameter*>& out) {
  for (auto& l : layers) l.collect(out);
}

void Adam::step(const std::vector<Parameter*>& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (Parameter* p : params) {
    if (p->grad.size() == 0) p->grad = Mat::Zero(p->value.rows(), p->value.cols());
    if (p->m.size() == 0) p->m = Mat::Zero(p->value.rows(), p->value.cols());
    if (p->v.size() == 0) p->v = Mat::Zero(p->value.rows(), p->value.cols());
    p->m = opts_.beta1 * p->m + (1.0 - opts_.beta1) * p->grad;
    p->v = opts_.beta2 * p->v + (1.0 - opts_.beta2) * p->grad.cwiseProduct(p->grad);
    p->value.array() -= opts_.learning_rate * (p->m.array() / c1) /
                        ((p->v.array() / c2).sqrt() + opts_.epsilon);
    p->grad.setZero();
  }
}

GinNetwork::GinNetwork(const std::string& name, int in_dim, int hidden, int layers, RngStream& rng)
    : hidden_(hidden) {
  if (layers < 1) throw ConfigError("GIN needs at least one layer");
  int in = in_dim;
  for (int l = 0; l < layers; ++l) {
    mlps_.emplace_back(name + ".layer" + std::to_string(l), std::vector<int>{in, hidden, hidden}, rng);
    in = hidden;
  }
}

Var GinNetwork::forward(Tape& tape, const std::shared_ptr<const SpMat>& adj_plus_identity, Var features) {
  Var h = features;
  for (std::size_t l = 0; l < mlps_.size(); ++l) {
    h = mlps_[l].forward(tape, tape.spmm(adj_plus_identity, h));
    if (l + 1 < mlps_.size()) h = tape.relu(h);
  }
  return h;
}

void GinNetwork::collect(std::vector<Parameter*>& out) {
  for (auto& m : mlps_) m.collect(out);
}

GraphBatch make_graph_batch(std::span<const Graph> graphs, int attr_dim) {
  std::size_t total = 0;
  std::size_t nnz = 0;
  for (const Graph& g : graphs) {
    total += g.n();
    nnz += g.n() + 2 * g.num_edges();
  }
  std::vector<Eigen::Triplet<double>> adj, pool;
  adj.reserve(nnz);
  pool.reserve(total);
  GraphBatch batch;
  batch.features = Mat::Zero(static_cast<Eigen::Index>(total), std::max(attr_dim, 1));
  std::size_t offset = 0;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = graphs[gi];
    for (VertexId v = 0; v < g.n(); ++v) {
      const auto row = static_cast<Eigen::Index>(offset + v);
      adj.emplace_back(row, row, 1.0);
      pool.emplace_back(static_cast<Eigen::Index>(gi), row, 1.0);
      if (attr_dim == 0) {
        batch.features(row, 0) = 1.0;
      } else if (g.attr(v) < attr_dim) {
        batch.features(row, g.attr(v)) = 1.0;
      }
    }
    for (const auto& [u, v] : g.edges()) {
      adj.emplace_back(static_cast<Eigen::Index>(offset + u), static_cast<Eigen::Index>(offset + v), 1.0);
      adj.emplace_back(static_cast<Eigen::Index>(offset + v), static_cast<Eigen::Index>(offset + u), 1.0);
    }
    offset += g.n();
  }
  auto a = std::make_shared<SpMat>(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  a->setFromTriplets(adj.begin(), adj.end());
  auto p = std::make_shared<SpMat>(static_cast<Eigen::Index>(graphs.size()), static_cast<Eigen::Index>(total));
  p->setFromTriplets(pool.begin(), pool.end());
  batch.adj_plus_identity = std::move(a);
  batch.pool = std::move(p);
  return batch;
}

GinBaseline::GinBaseline(int in_dim, int hidden, int layers, int classifier_hidden_layers, int num_classes,
                         RngStream& rng)
    : gin_("gin", in_dim, hidden, layers, rng) {
  std::vector<int> dims{hidden};
  for (int i = 0; i < classifier_hidden_layers; ++i) dims.push_back(hidden);
  dims.push_back(num_classes);
  classifier_ = Mlp("classifier", dims, rng);
}

Var GinBaseline::logits(Tape& tape, const GraphBatch& batch) {
  Var h = gin_.forward(tape, batch.adj_plus_identity, tape.constant(batch.features));
  return classifier_.forward(tape, tape.spmm(batch.pool, h));
}

std::vector<Parameter*> GinBaseline::parameters() {
  std::vector<Parameter*> out;
  gin_.collect(out);
  classifier_.collect(out);
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

std::vector<int> predict(const Mat& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    int best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(r, c) > logits(r, best)) best = static_cast<int>(c);
    out[static_cast<std::size_t>(r)] = best;
  }
  return out;
}

double matthews_corrcoef(const std::vector<std::vector<std::uint64_t>>& confusion) {
  const std::size_t k = confusion.size();
  double correct = 0.0, total = 0.0, sum_pt = 0.0, sum_pp = 0.0, sum_tt = 0.0;
  std::vector<double> predicted(k, 0.0), actual(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double c = static_cast<double>(confusion[i][j]);
      actual[i] += c;
      predicted[j] += c;
      total += c;
      if (i == j) correct += c;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    sum_pt += predicted[i] * actual[i];
    sum_pp += predicted[i] * predicted[i];
    sum_tt += actual[i] * actual[i];
  }
  const double denom = (total * total - sum_pp) * (total * total - sum_tt);
  if (denom <= 0.0) return 0.0;
  return (correct * total - sum_pt) / std::sqrt(denom);
}

Metrics evaluate_logits(const Mat& logits, const std::vector<int>& labels, int num_classes) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw ShapeMismatch("evaluate: " + std::to_string(logits.rows()) + " rows for " +
                        std::to_string(labels.size()) + " labels");
  }
  Metrics m;
  m.confusion.assign(num_classes, std::vector<std::uint64_t>(num_classes, 0));
  const auto pred = predict(logits);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const int y = labels[i];
    if (y < 0 || y >= num_classes) throw DataError("label " + std::to_string(y) + " outside the class range");
    const int p = pred[i] < num_classes ? pred[i] : num_classes - 1;
    ++m.confusion[y][p];
    correct += y == pred[i];
    if (y < logits.cols()) {
      const double mx = logits.row(r).maxCoeff();
      loss += std::log((logits.row(r).array() - mx).exp().sum()) + mx - logits(r, y);
    }
  }
  if (!labels.empty()) {
    m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    m.loss = loss / static_cast<double>(labels.size());
  }
  m.mcc = matthews_corrcoef(m.confusion);
  return m;
}

// ---------------------------------------------------------------------------
// Training

namespace {

double max_abs_parameter(const std::vector<Parameter*>& params, std::string* name) {
  double best = 0.0;
  for (const Parameter* p : params) {
    const double v = p->value.size() ? p->value.cwiseAbs().maxCoeff() : 0.0;
    if (!(v <= best)) {
      best = v;
      *name = p->name;
    }
  }
  return best;
}

}  // namespace

TrainResult train(TrainProblem& problem, const TrainOptions& opts) {
  if (opts.epochs < 1) throw ConfigError("epochs must be >= 1");
  Adam adam(AdamOptions{opts.learning_rate});
  TrainResult result;
  result.best_val_accuracy = -1.0;
  std::vector<Mat> best_values;
  const bool use_penalty = problem.penalty && opts.reg_weight > 0.0;
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    Tape tape;
    const auto n_train = static_cast<Eigen::Index>(problem.train_labels.size());
    const auto n_val = static_cast<Eigen::Index>(problem.val_labels.size());
    Var all = problem.logits(tape);
    if (all.rows() != n_train + n_val) {
      throw ShapeMismatch("model produced " + std::to_string(all.rows()) + " logit rows for " +
                          std::to_string(n_train + n_val) + " graphs");
    }
    Var logits = tape.slice_rows(all, 0, n_train);
    Var ce = tape.softmax_cross_entropy(logits, problem.train_labels);
    Var loss = ce;
    EpochRecord rec;
    rec.epoch = epoch;
    if (use_penalty) {
      auto rng = RngStream::derive(opts.seed, {static_cast<std::uint64_t>(StreamPurpose::kRegularizer),
                                               static_cast<std::uint64_t>(epoch)});
      Var pen = problem.penalty(tape, rng);
      rec.penalty = pen.scalar();
      loss = tape.add(ce, tape.scale(pen, opts.reg_weight));
    }
    rec.train_loss = ce.scalar();
    if (!std::isfinite(loss.scalar())) {
      std::string name = "(none)";
      const double mx = max_abs_parameter(problem.params, &name);
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch << ": cross-entropy=" << rec.train_loss
          << " penalty=" << rec.penalty << " learning_rate=" << opts.learning_rate
          << " largest |parameter|=" << mx << " in " << name;
      throw NonFiniteLoss(msg.str());
    }
    rec.train_accuracy = evaluate_logits(logits.value(), problem.train_labels, problem.num_classes).accuracy;
    const Metrics vm = evaluate_logits(all.value().middleRows(n_train, n_val), problem.val_labels,
                                       problem.num_classes);
    rec.val_loss = vm.loss;
    rec.val_accuracy = vm.accuracy;
    if (rec.val_accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = rec.val_accuracy;
      result.best_epoch = epoch;
      best_values.clear();
      for (const Parameter* p : problem.params) best_values.push_back(p->value);
    }
    result.history.push_back(rec);
    tape.backward(loss);
    adam.step(problem.params);
  }
  for (std::size_t i = 0; i < problem.params.size(); ++i) problem.params[i]->value = best_values[i];
  return result;
}

// ---------------------------------------------------------------------------
// Hyperparameters

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs: must be >= 1");
  if (learning_rates.empty()) throw ConfigError("train.learning_rate: grid must be nonempty");
  if (hidden.empty()) throw ConfigError("train.hidden: grid must be nonempty");
  if (layers.empty()) throw ConfigError("train.layers: grid must be nonempty");
  if (reg_weights.empty()) throw ConfigError("train.reg_weight: grid must be nonempty");
  for (double lr : learning_rates)
    if (!(lr > 0.0)) throw ConfigError("train.learning_rate: values must be positive");
  for (int h : hidden)
    if (h < 1) throw ConfigError("train.hidden: values must be >= 1");
  for (int l : layers)
    if (l < 1) throw ConfigError("train.layers: values must be >= 1");
  for (double r : reg_weights)
    if (!(r >= 0.0)) throw ConfigError("train.reg_weight: values must be >= 0");
  if (seeds < 1) throw ConfigError("train.seeds: must be >= 1");
  if (classifier_hidden_layers < 0) throw ConfigError("train.classifier_hidden_layers: must be >= 0");
  if (reg_samples_per_pattern < 1) throw ConfigError("train.reg_samples_per_pattern: must be >= 1");
  if (vocab_cap < 1) throw ConfigError("train.vocab_cap: must be >= 1");
}

std::vector<HyperParams> TrainConfig::grid() const {
  std::vector<HyperParams> out;
  const std::size_t nl = reduced_grid ? 1 : learning_rates.size();
  const std::size_t nh = reduced_grid ? 1 : hidden.size();
  const std::size_t ny = reduced_grid ? 1 : layers.size();
  const std::size_t nr = reduced_grid ? 1 : reg_weights.size();
  for (std::size_t a = 0; a < nl; ++a)
    for (std::size_t b = 0; b < nh; ++b)
      for (std::size_t c = 0; c < ny; ++c)
        for (std::size_t d = 0; d < nr; ++d)
          out.push_back({learning_rates[a], hidden[b], layers[c], reg_weights[d]});
  return out;
}

namespace {

template <typename T>
std::vector<T> scalar_or_list(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("train." + key + ": expected a number or a list of numbers");
  }
}

template <typename T>
T scalar(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("train." + key + ": wrong type");
  }
}

}  // namespace

TrainConfig parse_train_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train: must be a JSON object");
  static const char* known[] = {"epochs", "learning_rate", "hidden", "layers", "reg_weight", "seeds", "seed",
                                "classifier_hidden_layers", "reg_samples_per_pattern", "reduced_grid", "vocab_cap"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigError("train." + key + ": unknown field");
    }
  }
  TrainConfig c;
  if (j.contains("epochs")) c.epochs = scalar<int>(j, "epochs");
  if (j.contains("learning_rate")) c.learning_rates = scalar_or_list<double>(j, "learning_rate");
  if (j.contains("hidden")) c.hidden = scalar_or_list<int>(j, "hidden");
  if (j.contains("layers")) c.layers = scalar_or_list<int>(j, "layers");
  if (j.contains("reg_weight")) c.reg_weights = scalar_or_list<double>(j, "reg_weight");
  if (j.contains("seeds")) c.seeds = scalar<int>(j, "seeds");
  if (j.contains("seed")) c.base_seed = scalar<std::uint64_t>(j, "seed");
  if (j.contains("classifier_hidden_layers")) c.classifier_hidden_layers = scalar<int>(j, "classifier_hidden_layers");
  if (j.contains("reg_samples_per_pattern")) c.reg_samples_per_pattern = scalar<int>(j, "reg_samples_per_pattern");
  if (j.contains("reduced_grid")) c.reduced_grid = scalar<bool>(j, "reduced_grid");
  if (j.contains("vocab_cap")) c.vocab_cap = scalar<std::size_t>(j, "vocab_cap");
  c.validate();
  return c;
}

nlohmann::ordered_json train_config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["epochs"] = c.epochs;
  j["learning_rate"] = c.learning_rates;
  j["hidden"] = c.hidden;
  j["layers"] = c.layers;
  j["reg_weight"] = c.reg_weights;
  j["seeds"] = c.seeds;
  j["seed"] = c.base_seed;
  j["classifier_hidden_layers"] = c.classifier_hidden_layers;
  j["reg_samples_per_pattern"] = c.reg_samples_per_pattern;
  j["reduced_grid"] = c.reduced_grid;
  j["vocab_cap"] = c.vocab_cap;
  return j;
}

std::uint64_t run_seed(std::uint64_t base_seed, int index) {
  return RngStream::derive_key(base_seed, {static_cast<std::uint64_t>(StreamPurpose::kInit),
                                           static_cast<std::uint64_t>(index)});
}

}  // namespace ginv
