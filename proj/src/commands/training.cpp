#include "training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "ginv/errors.hpp"

namespace ginv::app::detail {

namespace {

constexpr std::array<Split, 3> kSplits{Split::kTrain, Split::kVal, Split::kTest};

template <typename T>
std::vector<T> concat(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

ModelSpec model_spec(const PreparedTask& task, const HyperParams& hp, const TrainConfig& cfg) {
  ModelSpec spec;
  spec.kind = task.kind;
  spec.hidden = hp.hidden;
  spec.layers = hp.layers;
  spec.classifier_hidden_layers = cfg.classifier_hidden_layers;
  spec.num_classes = task.num_classes;
  spec.attr_dim = task.attr_dim;
  spec.max_k = task.census.k;
  spec.reg_samples_per_pattern = cfg.reg_samples_per_pattern;
  spec.alphabet = task.alphabet;
  return spec;
}

nlohmann::ordered_json settings_json(const ModelSpec& spec, const PreparedTask& task, const HyperParams& hp,
                                     std::uint64_t seed, int seed_index, int best_epoch) {
  nlohmann::ordered_json j;
  j["representation"] = repr_kind_name(spec.kind);
  j["hidden"] = spec.hidden;
  j["layers"] = spec.layers;
  j["classifier_hidden_layers"] = spec.classifier_hidden_layers;
  j["num_classes"] = spec.num_classes;
  j["attr_dim"] = spec.attr_dim;
  j["attributed"] = task.attributed;
  j["max_k"] = spec.max_k;
  j["reg_samples_per_pattern"] = spec.reg_samples_per_pattern;
  std::vector<int> alphabet(spec.alphabet.begin(), spec.alphabet.end());
  j["alphabet"] = alphabet;
  j["census"] = task.census.to_json();
  j["hyperparameters"] = {{"learning_rate", hp.learning_rate},
                          {"hidden", hp.hidden},
                          {"layers", hp.layers},
                          {"reg_weight", hp.reg_weight}};
  j["seed"] = seed;
  j["seed_index"] = seed_index;
  j["best_epoch"] = best_epoch;
  return j;
}

ModelSpec spec_from_settings(const nlohmann::json& s) {
  ModelSpec spec;
  try {
    spec.kind = parse_repr_kind(s.at("representation").get<std::string>());
    spec.hidden = s.at("hidden").get<int>();
    spec.layers = s.at("layers").get<int>();
    spec.classifier_hidden_layers = s.at("classifier_hidden_layers").get<int>();
    spec.num_classes = s.at("num_classes").get<int>();
    spec.attr_dim = s.at("attr_dim").get<int>();
    spec.max_k = s.at("max_k").get<int>();
    spec.reg_samples_per_pattern = s.at("reg_samples_per_pattern").get<int>();
    spec.alphabet.clear();
    for (int a : s.at("alphabet").get<std::vector<int>>()) spec.alphabet.push_back(static_cast<AttrId>(a));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint settings are incomplete: ") + e.what());
  }
  return spec;
}

// A trained model of any kind together with its prepared inputs.
class Model {
 public:
  Model(const PreparedTask& task, const ModelSpec& spec, Vocabulary vocab, RngStream& rng) : task_(task) {
    if (spec.kind == ReprKind::kGinBaseline) {
      baseline_ = GinBaseline(task.attributed ? task.attr_dim : 1, spec.hidden, spec.layers,
                              spec.classifier_hidden_layers, spec.num_classes, rng);
      trainval_graphs_ = concat(*task.graphs[0], *task.graphs[1]);
      trainval_batch_ = make_graph_batch(trainval_graphs_, feature_mode());
    } else {
      density_ = DensityModel(spec, std::move(vocab), rng);
      trainval_ = density_.prepare(concat(task.densities[0], task.densities[1]));
      if (spec.kind != ReprKind::kOneHot) train_only_ = density_.prepare(task.densities[0]);
    }
  }

  bool is_baseline() const { return task_.kind == ReprKind::kGinBaseline; }

  std::vector<Parameter*> parameters() { return is_baseline() ? baseline_.parameters() : density_.parameters(); }

  Var trainval_logits(Tape& t) {
    return is_baseline() ? baseline_.logits(t, trainval_batch_) : density_.logits(t, trainval_);
  }

  Var penalty(Tape& t, RngStream& rng) { return density_.penalty(t, train_only_, rng); }

  Mat test_logits(std::size_t* dropped) {
    Tape t;
    if (is_baseline()) {
      const GraphBatch batch = make_graph_batch(*task_.graphs[2], feature_mode());
      return baseline_.logits(t, batch).value();
    }
    const auto input = density_.prepare(task_.densities[2]);
    if (dropped) *dropped = input.dropped_patterns;
    return density_.logits(t, input).value();
  }

  std::array<Metrics, 3> evaluate(std::size_t* dropped) {
    Tape t;
    const Mat all = trainval_logits(t).value();
    const auto n_train = static_cast<Eigen::Index>(task_.labels[0].size());
    const auto n_val = static_cast<Eigen::Index>(task_.labels[1].size());
    std::array<Metrics, 3> m;
    m[0] = evaluate_logits(all.topRows(n_train), task_.labels[0], task_.num_classes);
    m[1] = evaluate_logits(all.middleRows(n_train, n_val), task_.labels[1], task_.num_classes);
    m[2] = evaluate_logits(test_logits(dropped), task_.labels[2], task_.num_classes);
    return m;
  }

  const Vocabulary& vocabulary() const { return density_.vocabulary(); }

 private:
  int feature_mode() const { return task_.attributed ? task_.attr_dim : 0; }

  const PreparedTask& task_;
  GinBaseline baseline_;
  std::vector<Graph> trainval_graphs_;
  GraphBatch trainval_batch_;
  DensityModel density_;
  DensityModel::Input trainval_;
  DensityModel::Input train_only_;
};

}  // namespace

PreparedTask prepare_task(const Dataset& data, ReprKind kind, const CensusSettings& census,
                          const std::optional<std::filesystem::path>& cache_dir, bool census_inline,
                          int threads, const Io& io) {
  PreparedTask task;
  task.kind = kind;
  task.census = census;
  task.task_hash = data.task_hash;
  if (data.train.empty() || data.val.empty()) throw DataError("training and validation splits must be nonempty");
  int max_label = 0;
  std::set<AttrId> seen;
  for (int si = 0; si < 3; ++si) {
    const auto& graphs = data.split(kSplits[si]);
    task.graphs[si] = &graphs;
    for (const Graph& g : graphs) {
      const int y = *g.label();
      if (y < 0) throw DataError("class labels must be non-negative");
      task.labels[si].push_back(y);
      if (si < 2) {
        max_label = std::max(max_label, y);
        if (g.has_attrs()) {
          task.attributed = true;
          seen.insert(g.attrs()->begin(), g.attrs()->end());
        }
      }
    }
  }
  task.num_classes = std::max(2, max_label + 1);
  for (int y : task.labels[2]) {
    if (y >= task.num_classes) throw DataError("test split has class " + std::to_string(y) + " unseen in training");
  }
  if (task.attributed) {
    task.alphabet.assign(seen.begin(), seen.end());
    task.attr_dim = static_cast<int>(task.alphabet.back()) + 1;
  }
  if (kind != ReprKind::kGinBaseline) {
    for (int si = 0; si < 3; ++si) {
      task.densities[si] =
          split_densities(*task.graphs[si], kSplits[si], census, cache_dir, census_inline, threads, io);
    }
  }
  return task;
}

RunResult run_one(const PreparedTask& task, const HyperParams& hp, const TrainConfig& cfg, int seed_index,
                  bool keep_checkpoint) {
  RunResult res;
  res.hp = hp;
  res.seed_index = seed_index;
  res.seed = run_seed(cfg.base_seed, seed_index);
  RngStream init(res.seed);
  const ModelSpec spec = model_spec(task, hp, cfg);
  Vocabulary vocab;
  if (task.kind == ReprKind::kOneHot) vocab = frozen_vocabulary(concat(task.densities[0], task.densities[1]), cfg.vocab_cap);
  Model model(task, spec, std::move(vocab), init);

  TrainProblem problem;
  problem.params = model.parameters();
  problem.logits = [&](Tape& t) { return model.trainval_logits(t); };
  const bool regularize = (task.kind == ReprKind::kGin || task.kind == ReprKind::kGinPlus) &&
                          hp.reg_weight > 0.0 && task.alphabet.size() > 1;
  if (regularize) problem.penalty = [&](Tape& t, RngStream& rng) { return model.penalty(t, rng); };
  problem.train_labels = task.labels[0];
  problem.val_labels = task.labels[1];
  problem.num_classes = task.num_classes;

  TrainOptions opts;
  opts.epochs = cfg.epochs;
  opts.learning_rate = hp.learning_rate;
  opts.reg_weight = regularize ? hp.reg_weight : 0.0;
  opts.seed = res.seed;
  res.train = train(problem, opts);
  res.metrics = model.evaluate(&res.dropped_test_patterns);

  if (keep_checkpoint) {
    Checkpoint ckpt;
    ckpt.task_hash = task.task_hash;
    ckpt.settings = settings_json(spec, task, hp, res.seed, seed_index, res.train.best_epoch);
    if (task.kind == ReprKind::kOneHot) ckpt.vocabulary = model.vocabulary().patterns();
    ckpt.tensors = snapshot_parameters(model.parameters());
    res.checkpoint = std::move(ckpt);
  }
  return res;
}

CensusSettings checkpoint_census(const Checkpoint& ckpt) {
  if (!ckpt.settings.contains("census")) throw DataError("checkpoint has no census settings");
  return CensusSettings::from_json(ckpt.settings["census"], "checkpoint.census");
}

ReprKind checkpoint_kind(const Checkpoint& ckpt) { return spec_from_settings(ckpt.settings).kind; }

std::array<Metrics, 3> evaluate_checkpoint(const Checkpoint& ckpt, const PreparedTask& task,
                                           std::size_t* dropped_test_patterns) {
  const ModelSpec spec = spec_from_settings(ckpt.settings);
  if (spec.num_classes < task.num_classes) {
    throw DataError("checkpoint has " + std::to_string(spec.num_classes) + " classes but the dataset has " +
                    std::to_string(task.num_classes));
  }
  const bool attributed = ckpt.settings.value("attributed", false);
  if (attributed != task.attributed) {
    throw DataError(std::string("vocabulary mismatch: checkpoint was trained on ") +
                    (attributed ? "attributed" : "unattributed") + " graphs, dataset is " +
                    (task.attributed ? "attributed" : "unattributed"));
  }
  if (spec.kind == ReprKind::kOneHot) {
    const auto sizes = task.census.sizes();
    for (const PatternCode& c : ckpt.vocabulary) {
      if (std::find(sizes.begin(), sizes.end(), int(c.k)) == sizes.end()) {
        throw DataError("vocabulary mismatch: checkpoint pattern of size " + std::to_string(c.k) +
                        " is not covered by the census sizes");
      }
    }
  }
  // Evaluation uses the checkpoint's own class count and feature widths.
  PreparedTask view = task;
  view.num_classes = spec.num_classes;
  view.attr_dim = spec.attr_dim;
  view.alphabet = spec.alphabet;
  RngStream unused(0);
  Model model(view, spec, Vocabulary(ckpt.vocabulary), unused);
  restore_parameters(ckpt, model.parameters());
  return model.evaluate(dropped_test_patterns);
}

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

std::string table_row(const std::string& name, const std::array<MeanStd, 3>& acc) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-14s train %.2f (%.2f)  val %.2f (%.2f)  test %.2f (%.2f)", name.c_str(),
                acc[0].mean, acc[0].std, acc[1].mean, acc[1].std, acc[2].mean, acc[2].std);
  return buf;
}

std::string metrics_csv(const TrainResult& r) {
  std::ostringstream os;
  os << "epoch,split,loss,accuracy\n";
  for (const EpochRecord& e : r.history) {
    os << e.epoch << ",train," << format_double(e.train_loss) << ',' << format_double(e.train_accuracy) << '\n';
    os << e.epoch << ",val," << format_double(e.val_loss) << ',' << format_double(e.val_accuracy) << '\n';
  }
  return os.str();
}

}  // namespace ginv::app::detail
