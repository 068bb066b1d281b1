#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ginv/app.hpp"
#include "ginv/checkpoint.hpp"
#include "ginv/nn.hpp"
#include "ginv/repr.hpp"

namespace ginv::app::detail {

// Labels and inputs of the three splits in the form the models consume.
struct PreparedTask {
  ReprKind kind = ReprKind::kOneHot;
  CensusSettings census;
  int num_classes = 2;
  // Attribute ids seen in train and validation, and the one-hot input width.
  std::vector<AttrId> alphabet{0};
  int attr_dim = 1;
  bool attributed = false;
  std::uint64_t task_hash = 0;
  std::array<std::vector<int>, 3> labels;
  std::array<std::vector<PatternDensities>, 3> densities;  // density models
  std::array<const std::vector<Graph>*, 3> graphs{};        // baseline
};

// Loads labels and censuses. The dataset must outlive the result.
PreparedTask prepare_task(const Dataset& data, ReprKind kind, const CensusSettings& census,
                          const std::optional<std::filesystem::path>& cache_dir, bool census_inline,
                          int threads, const Io& io);

struct RunResult {
  HyperParams hp;
  int seed_index = 0;
  std::uint64_t seed = 0;
  TrainResult train;
  std::array<Metrics, 3> metrics;
  std::size_t dropped_test_patterns = 0;
  std::optional<Checkpoint> checkpoint;
};

RunResult run_one(const PreparedTask& task, const HyperParams& hp, const TrainConfig& cfg, int seed_index,
                  bool keep_checkpoint);

// Rebuilds a trained model from its checkpoint and scores the three splits.
std::array<Metrics, 3> evaluate_checkpoint(const Checkpoint& ckpt, const PreparedTask& task,
                                           std::size_t* dropped_test_patterns);

// Census settings and representation recorded in a checkpoint.
CensusSettings checkpoint_census(const Checkpoint& ckpt);
ReprKind checkpoint_kind(const Checkpoint& ckpt);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
// Sample standard deviation (n - 1); 0 for a single value.
MeanStd mean_std(const std::vector<double>& v);

// "name  train 1.00 (0.00)  val 1.00 (0.00)  test 0.98 (0.02)"
std::string table_row(const std::string& name, const std::array<MeanStd, 3>& acc);

std::string metrics_csv(const TrainResult& r);

}  // namespace ginv::app::detail
