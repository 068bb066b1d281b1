#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ginv/graph.hpp"
#include "ginv/rng.hpp"

namespace ginv {

// Vertex colors of the two-block attributed SBM.
enum Color : AttrId { kRed = 0, kBlue = 1, kGreen = 2, kYellow = 3 };
inline constexpr std::array<const char*, 4> kColorNames{"red", "blue", "green", "yellow"};

struct ErGraphon {
  double p = 0.0;
};

struct SbmGraphon {
  // Cut points 0 = t_0 < t_1 < ... < t_r = 1.
  std::vector<double> boundaries;
  // r x r symmetric block edge probabilities.
  std::vector<std::vector<double>> probs;
  // Two-block graphs only: colors derived from the diagonal map.
  bool attributed = false;
};

// Piecewise-constant graphon W together with its diagonal attribute map.
class Graphon {
 public:
  Graphon() = default;
  explicit Graphon(ErGraphon er);
  explicit Graphon(SbmGraphon sbm);

  bool attributed() const;
  std::size_t num_blocks() const;
  std::size_t block_of(double u) const;
  double edge_probability(std::size_t block_u, std::size_t block_v) const;
  double operator()(double u, double v) const {
    return edge_probability(block_of(u), block_of(v));
  }
  // W(u, u) for the attributed two-block model: maps block 1 linearly onto
  // [0, 1/2) and block 2 onto [1/2, 1].
  double diagonal(double u) const;

  const std::variant<ErGraphon, SbmGraphon>& kind() const { return kind_; }

 private:
  std::variant<ErGraphon, SbmGraphon> kind_;
};

struct Environment {
  // Graph sizes; each graph draws one uniformly.
  std::vector<std::uint32_t> sizes;
  // Thresholds alpha_1 in (0, 1/2) and alpha_2 in (1/2, 1) on W(u, u).
  std::optional<std::array<double, 2>> attr_cuts;
};

// Converts the in-block frequency of the first color of each block (red in
// block 1, green in block 2) into diagonal thresholds.
std::array<double, 2> attr_cuts_from_frequencies(double first_block_red, double second_block_green);

// Colors: red/blue below 1/2 (block 1), green/yellow above (block 2).
AttrId color_from_diagonal(double diagonal, const std::array<double, 2>& cuts);

struct GraphonClass {
  Graphon graphon;
  int label = 0;
};

struct SplitCounts {
  std::size_t train = 0, val = 0, test = 0;
};

struct TaskSpec {
  std::string name;
  std::vector<GraphonClass> classes;
  Environment train_env;
  Environment test_env;
  SplitCounts counts;
  std::uint64_t seed = 0;
  // Smallest pattern size that downstream censuses may ask for.
  std::uint32_t min_size = 1;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

enum class Split : std::uint64_t { kTrain = 0, kVal = 1, kTest = 2 };
const char* split_name(Split s);

struct TaskDatasets {
  std::vector<Graph> train, val, test;
};

// Draws one graph: latent U_v ~ U(0,1), edge (u,v) iff Z_uv <= W(U_u, U_v),
// and in attributed mode one of four colors per vertex.
Graph sample_graph(const Graphon& graphon, const Environment& env, std::uint32_t n,
                   RngStream& latent_rng, RngStream& edge_rng, std::optional<int> label = {});

// Convenience overload drawing n from env.sizes with `rng`.
Graph sample_graph(const Graphon& graphon, const Environment& env, RngStream& rng,
                   std::optional<int> label = {});

// Graph `index` of `split`; depends only on (spec.seed, split, index).
Graph generate_graph(const TaskSpec& spec, Split split, std::size_t index);

TaskDatasets generate_task(const TaskSpec& spec, int threads = 1);

// `field` prefixes error messages, e.g. "classes[0].graphon".
Graphon parse_graphon(const nlohmann::json& j, const std::string& field);
nlohmann::ordered_json graphon_to_json(const Graphon& g);

TaskSpec parse_task_spec(const nlohmann::json& j);
TaskSpec load_task_spec(const std::string& path);
nlohmann::ordered_json task_spec_to_json(const TaskSpec& spec);
std::uint64_t task_spec_hash(const TaskSpec& spec);

// Sidecar metadata for generated datasets.
nlohmann::ordered_json dataset_metadata(const TaskSpec& spec);

// Built-in task configurations from the synthetic experiments.
TaskSpec er_size_task(std::uint64_t seed = 1);
TaskSpec sbm_attributed_task(std::uint64_t seed = 1);

}  // namespace ginv
