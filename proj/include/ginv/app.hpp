#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ginv/census.hpp"
#include "ginv/graph.hpp"
#include "ginv/nn.hpp"
#include "ginv/repr.hpp"
#include "ginv/scm.hpp"

// Command implementations behind the C API and the command-line tool.
namespace ginv::app {

// Destinations for command output: `out` receives the report a command
// prints, `log` receives progress notes. Either may be empty.
struct Io {
  std::function<void(std::string_view)> out;
  std::function<void(std::string_view)> log;

  void print(std::string_view s) const {
    if (out) out(s);
  }
  void note(std::string_view s) const {
    if (log) log(s);
  }
};

// Flags shared by every command.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
};

// Which censuses a model consumes.
struct CensusSettings {
  int k = 5;
  // Use every size from min(3, k) to k instead of exactly k.
  bool le_k = false;
  Norm norm = Norm::kOmega;
  CensusMode mode = CensusMode::kExact;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;

  std::vector<int> sizes() const;
  CensusRequest request(int size) const;
  nlohmann::ordered_json to_json() const;
  static CensusSettings from_json(const nlohmann::json& j, const std::string& field);
};

// ---------------------------------------------------------------------------
// Datasets on disk: <dir>/{train,val,test}.jsonl and <dir>/metadata.json.

struct Dataset {
  std::vector<Graph> train, val, test;
  nlohmann::ordered_json metadata;
  std::uint64_t task_hash = 0;

  const std::vector<Graph>& split(Split s) const;
};

Dataset load_dataset(const std::filesystem::path& dir);
void write_dataset(const std::filesystem::path& dir, const TaskDatasets& data, const TaskSpec& spec);

// Cache file of one split inside a cache directory.
std::filesystem::path cache_file(const std::filesystem::path& cache_dir, Split s);

// Per-graph densities of one split over the configured sizes. Without
// `compute_missing`, a graph absent from the cache raises DataError.
std::vector<PatternDensities> split_densities(const std::vector<Graph>& graphs, Split s,
                                              const CensusSettings& census,
                                              const std::optional<std::filesystem::path>& cache_dir,
                                              bool compute_missing, int threads, const Io& io);

// ---------------------------------------------------------------------------
// Commands

struct GenCommand {
  Common common;
  // Built-in task used when no config file is given: "er" or "sbm".
  std::string task = "er";
};
void cmd_gen(const GenCommand& cmd, const Io& io);

struct VocabCommand {
  int k = 3;
  std::vector<AttrId> alphabet{0};
  bool le_k = false;
  bool header = false;
};
// Prints "index topo_bits attrs aut_count" per pattern.
void cmd_vocab(const VocabCommand& cmd, const Io& io);

struct CensusCommand {
  Common common;
  std::string data;
  // Defaults to <out>, or <data>/cache when --out is empty.
  std::string cache_dir;
  CensusSettings census;
};
void cmd_census(const CensusCommand& cmd, const Io& io);

struct TrainCommand {
  Common common;
  std::string data;
  std::string cache_dir;
  ReprKind repr = ReprKind::kOneHot;
  CensusSettings census;
  bool census_inline = false;
  // Used when `common.config` is empty.
  std::optional<TrainConfig> train_config;
};
void cmd_train(const TrainCommand& cmd, const Io& io);

struct EvalCommand {
  Common common;
  std::string data;
  std::string cache_dir;
  // Output directory of a train run.
  std::string model;
  // When given, must agree with the checkpoint.
  std::optional<int> k;
  std::optional<Norm> norm;
  bool census_inline = false;
};
void cmd_eval(const EvalCommand& cmd, const Io& io);

struct BoundCheckCommand {
  Common common;
  std::optional<Graphon> graphon;
  std::vector<std::uint32_t> sizes;
  std::optional<int> k;
  std::vector<double> epsilons;
  std::optional<int> trials;
  // Also emit cells for every pair of distinct sizes.
  bool cross_sizes = false;
};
void cmd_bound_check(const BoundCheckCommand& cmd, const Io& io);

struct PipelineCommand {
  Common common;
};
void cmd_pipeline(const PipelineCommand& cmd, const Io& io);

// ---------------------------------------------------------------------------
// Helpers shared by the commands

// "%.17g"-style shortest round-trip formatting used in every CSV.
std::string format_double(double v);
std::string hex64(std::uint64_t v);

// Writes <dir>/manifest.json. `config` is the effective configuration;
// its hash identifies the run.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const nlohmann::ordered_json& config, std::optional<std::uint64_t> seed,
                    const std::vector<std::string>& artifacts, double wall_clock_seconds, int threads);

nlohmann::json read_json_file(const std::string& path);

}  // namespace ginv::app
