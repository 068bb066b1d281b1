#include "ginv/scm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "ginv/errors.hpp"
#include "ginv/hash.hpp"
#include "ginv/parallel.hpp"

namespace ginv {

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

void validate_sbm(const SbmGraphon& sbm, const std::string& field) {
  const auto& t = sbm.boundaries;
  if (t.size() < 2) throw ConfigError(field + ".boundaries needs at least two cut points");
  if (t.front() != 0.0 || t.back() != 1.0) {
    throw ConfigError(field + ".boundaries must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw ConfigError(field + ".boundaries must be strictly increasing");
  }
  const std::size_t r = t.size() - 1;
  if (sbm.probs.size() != r) throw ConfigError(field + ".probs must be " + std::to_string(r) + "x" + std::to_string(r));
  for (std::size_t i = 0; i < r; ++i) {
    if (sbm.probs[i].size() != r) throw ConfigError(field + ".probs must be square");
    for (std::size_t j = 0; j < r; ++j) {
      if (!is_probability(sbm.probs[i][j])) throw ConfigError(field + ".probs entries must lie in [0,1]");
      if (sbm.probs[i][j] != sbm.probs[j][i]) throw ConfigError(field + ".probs must be symmetric");
    }
  }
  if (sbm.attributed && r != 2) throw ConfigError(field + ".attributed requires exactly two blocks");
}

}  // namespace

Graphon::Graphon(ErGraphon er) : kind_(er) {
  if (!is_probability(er.p)) throw ConfigError("graphon.p must lie in [0,1]");
}

Graphon::Graphon(SbmGraphon sbm) : kind_(std::move(sbm)) {
  validate_sbm(std::get<SbmGraphon>(kind_), "graphon");
}

bool Graphon::attributed() const {
  const auto* sbm = std::get_if<SbmGraphon>(&kind_);
  return sbm && sbm->attributed;
}

std::size_t Graphon::num_blocks() const {
  const auto* sbm = std::get_if<SbmGraphon>(&kind_);
  return sbm ? sbm->boundaries.size() - 1 : 1;
}

std::size_t Graphon::block_of(double u) const {
  const auto* sbm = std::get_if<SbmGraphon>(&kind_);
  if (!sbm) return 0;
  // Blocks are [t_{i-1}, t_i); the last block also holds u = 1.
  const auto& t = sbm->boundaries;
  auto it = std::upper_bound(t.begin() + 1, t.end() - 1, u);
  return static_cast<std::size_t>(it - (t.begin() + 1));
}

double Graphon::edge_probability(std::size_t block_u, std::size_t block_v) const {
  if (const auto* er = std::get_if<ErGraphon>(&kind_)) return er->p;
  return std::get<SbmGraphon>(kind_).probs[block_u][block_v];
}

double Graphon::diagonal(double u) const {
  const auto* sbm = std::get_if<SbmGraphon>(&kind_);
  if (!sbm || sbm->boundaries.size() != 3) return 0.0;
  const double t1 = sbm->boundaries[1];
  if (u < t1) return u / (2.0 * t1);
  return 0.5 + (u - t1) / (2.0 * (1.0 - t1));
}

std::array<double, 2> attr_cuts_from_frequencies(double first_block_red, double second_block_green) {
  // Within block 1 the diagonal is uniform on [0, 1/2), within block 2 on [1/2, 1].
  return {0.5 * first_block_red, 0.5 + 0.5 * second_block_green};
}

AttrId color_from_diagonal(double d, const std::array<double, 2>& cuts) {
  if (d < cuts[0]) return kRed;
  if (d < 0.5) return kBlue;
  if (d < cuts[1]) return kGreen;
  return kYellow;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

void TaskSpec::validate() const {
  if (classes.size() < 2) throw ConfigError("classes: at least two graphon classes are required");
  std::set<int> labels;
  bool any_attributed = false;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    labels.insert(classes[i].label);
    any_attributed |= classes[i].graphon.attributed();
  }
  if (labels.size() != classes.size() || *labels.begin() != 0 ||
      *labels.rbegin() != static_cast<int>(classes.size()) - 1) {
    throw ConfigError("classes[].label: labels must be distinct and dense 0..C-1");
  }
  auto check_env = [&](const Environment& env, const std::string& field) {
    if (env.sizes.empty()) throw ConfigError(field + ".sizes must be nonempty");
    for (auto n : env.sizes) {
      if (n < 1 || n < min_size) {
        throw ConfigError(field + ".sizes entries must be >= " + std::to_string(std::max(1u, min_size)));
      }
    }
    if (any_attributed && !env.attr_cuts) {
      throw ConfigError(field + ".attr_cuts (or color_frequencies) required for attributed graphons");
    }
    if (env.attr_cuts) {
      const auto& a = *env.attr_cuts;
      if (!(a[0] > 0.0 && a[0] < 0.5 && a[1] > 0.5 && a[1] < 1.0)) {
        throw ConfigError(field + ".attr_cuts must satisfy 0 < a1 < 0.5 < a2 < 1");
      }
    }
  };
  check_env(train_env, "train_env");
  check_env(test_env, "test_env");
}

Graph sample_graph(const Graphon& graphon, const Environment& env, std::uint32_t n,
                   RngStream& latent_rng, RngStream& edge_rng, std::optional<int> label) {
  std::vector<double> latent(n);
  std::vector<std::uint32_t> block(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    latent[v] = latent_rng.uniform();
    block[v] = static_cast<std::uint32_t>(graphon.block_of(latent[v]));
  }
  const std::size_t r = graphon.num_blocks();
  std::vector<double> prob(r * r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) prob[i * r + j] = graphon.edge_probability(i, j);

  std::vector<Edge> edges;
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint32_t v = u + 1; v < n; ++v) {
      double z = edge_rng.uniform_open_closed();
      if (z <= prob[block[u] * r + block[v]]) edges.emplace_back(u, v);
    }
  }

  std::optional<std::vector<AttrId>> attrs;
  if (graphon.attributed()) {
    if (!env.attr_cuts) throw ConfigError("attributed graphon needs environment attr_cuts");
    attrs.emplace(n);
    for (std::uint32_t v = 0; v < n; ++v) {
      (*attrs)[v] = color_from_diagonal(graphon.diagonal(latent[v]), *env.attr_cuts);
    }
  }
  return Graph(n, std::move(edges), std::move(attrs), label);
}

Graph sample_graph(const Graphon& graphon, const Environment& env, RngStream& rng,
                   std::optional<int> label) {
  if (env.sizes.empty()) throw ConfigError("environment has no sizes");
  std::uint32_t n = env.sizes[rng.below(env.sizes.size())];
  RngStream latent(rng());
  RngStream edges(rng());
  return sample_graph(graphon, env, n, latent, edges, label);
}

Graph generate_graph(const TaskSpec& spec, Split split, std::size_t index) {
  const auto s = static_cast<std::uint64_t>(split);
  const GraphonClass& cls = spec.classes[index % spec.classes.size()];
  const Environment& env = split == Split::kTest ? spec.test_env : spec.train_env;
  auto size_rng = RngStream::derive(spec.seed, {s, index, static_cast<std::uint64_t>(StreamPurpose::kGraphSize)});
  auto latent_rng = RngStream::derive(spec.seed, {s, index, static_cast<std::uint64_t>(StreamPurpose::kVertexLatent)});
  auto edge_rng = RngStream::derive(spec.seed, {s, index, static_cast<std::uint64_t>(StreamPurpose::kEdgeNoise)});
  std::uint32_t n = env.sizes[size_rng.below(env.sizes.size())];
  return sample_graph(cls.graphon, env, n, latent_rng, edge_rng, cls.label);
}

TaskDatasets generate_task(const TaskSpec& spec, int threads) {
  spec.validate();
  TaskDatasets out;
  auto fill = [&](std::vector<Graph>& dst, Split split, std::size_t count) {
    dst.resize(count);
    parallel_for(count, threads, [&](std::size_t i) { dst[i] = generate_graph(spec, split, i); });
  };
  fill(out.train, Split::kTrain, spec.counts.train);
  fill(out.val, Split::kVal, spec.counts.val);
  fill(out.test, Split::kTest, spec.counts.test);
  return out;
}

// --- JSON ------------------------------------------------------------------

namespace {

template <typename T>
T get_field(const nlohmann::json& j, const std::string& key, const std::string& field) {
  if (!j.contains(key)) throw ConfigError(field + "." + key + ": missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(field + "." + key + ": wrong type");
  }
}

}  // namespace

Graphon parse_graphon(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field + ": must be an object");
  const auto kind = get_field<std::string>(j, "kind", field);
  if (kind == "er") {
    double p = get_field<double>(j, "p", field);
    if (!is_probability(p)) throw ConfigError(field + ".p: must lie in [0,1]");
    return Graphon(ErGraphon{p});
  }
  if (kind == "sbm") {
    SbmGraphon sbm;
    sbm.boundaries = get_field<std::vector<double>>(j, "boundaries", field);
    sbm.probs = get_field<std::vector<std::vector<double>>>(j, "probs", field);
    if (j.contains("attributed")) sbm.attributed = get_field<bool>(j, "attributed", field);
    validate_sbm(sbm, field);
    return Graphon(std::move(sbm));
  }
  throw ConfigError(field + ".kind: expected \"er\" or \"sbm\", got \"" + kind + "\"");
}

namespace {

Environment parse_env(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field + ": must be an object");
  Environment env;
  auto sizes = get_field<std::vector<std::int64_t>>(j, "sizes", field);
  for (auto s : sizes) {
    if (s < 1 || s > 1'000'000) throw ConfigError(field + ".sizes: entries must lie in [1, 1e6]");
    env.sizes.push_back(static_cast<std::uint32_t>(s));
  }
  if (j.contains("attr_cuts")) {
    auto a = get_field<std::vector<double>>(j, "attr_cuts", field);
    if (a.size() != 2) throw ConfigError(field + ".attr_cuts: expected two thresholds");
    env.attr_cuts = std::array<double, 2>{a[0], a[1]};
  } else if (j.contains("color_frequencies")) {
    auto f = get_field<std::vector<double>>(j, "color_frequencies", field);
    if (f.size() != 2 || !(f[0] > 0 && f[0] < 1 && f[1] > 0 && f[1] < 1)) {
      throw ConfigError(field + ".color_frequencies: expected two values in (0,1)");
    }
    env.attr_cuts = attr_cuts_from_frequencies(f[0], f[1]);
  }
  return env;
}

}  // namespace

nlohmann::ordered_json graphon_to_json(const Graphon& g) {
  nlohmann::ordered_json j;
  if (const auto* er = std::get_if<ErGraphon>(&g.kind())) {
    j["kind"] = "er";
    j["p"] = er->p;
  } else {
    const auto& sbm = std::get<SbmGraphon>(g.kind());
    j["kind"] = "sbm";
    j["boundaries"] = sbm.boundaries;
    j["probs"] = sbm.probs;
    j["attributed"] = sbm.attributed;
  }
  return j;
}

namespace {

nlohmann::ordered_json env_to_json(const Environment& env) {
  nlohmann::ordered_json j;
  j["sizes"] = env.sizes;
  if (env.attr_cuts) j["attr_cuts"] = {(*env.attr_cuts)[0], (*env.attr_cuts)[1]};
  return j;
}

}  // namespace

TaskSpec parse_task_spec(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("task: must be a JSON object");
  TaskSpec spec;
  spec.name = j.value("name", std::string("task"));
  if (j.contains("seed")) spec.seed = get_field<std::uint64_t>(j, "seed", "task");
  if (j.contains("min_size")) spec.min_size = get_field<std::uint32_t>(j, "min_size", "task");
  if (!j.contains("classes") || !j["classes"].is_array()) {
    throw ConfigError("task.classes: missing or not a list");
  }
  const auto& classes = j["classes"];
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string field = "classes[" + std::to_string(i) + "]";
    if (!classes[i].is_object()) throw ConfigError(field + ": must be an object");
    GraphonClass cls;
    cls.label = classes[i].contains("label") ? get_field<int>(classes[i], "label", field)
                                             : static_cast<int>(i);
    if (!classes[i].contains("graphon")) throw ConfigError(field + ".graphon: missing");
    cls.graphon = parse_graphon(classes[i]["graphon"], field + ".graphon");
    spec.classes.push_back(std::move(cls));
  }
  if (!j.contains("train_env")) throw ConfigError("task.train_env: missing");
  if (!j.contains("test_env")) throw ConfigError("task.test_env: missing");
  spec.train_env = parse_env(j["train_env"], "train_env");
  spec.test_env = parse_env(j["test_env"], "test_env");
  if (!j.contains("counts") || !j["counts"].is_object()) throw ConfigError("task.counts: missing");
  spec.counts.train = get_field<std::size_t>(j["counts"], "train", "counts");
  spec.counts.val = get_field<std::size_t>(j["counts"], "val", "counts");
  spec.counts.test = get_field<std::size_t>(j["counts"], "test", "counts");
  spec.validate();
  return spec;
}

TaskSpec load_task_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  if (j.contains("task")) return parse_task_spec(j["task"]);
  return parse_task_spec(j);
}

nlohmann::ordered_json task_spec_to_json(const TaskSpec& spec) {
  nlohmann::ordered_json j;
  j["name"] = spec.name;
  j["seed"] = spec.seed;
  j["min_size"] = spec.min_size;
  auto classes = nlohmann::ordered_json::array();
  for (const auto& c : spec.classes) {
    nlohmann::ordered_json cj;
    cj["label"] = c.label;
    cj["graphon"] = graphon_to_json(c.graphon);
    classes.push_back(std::move(cj));
  }
  j["classes"] = std::move(classes);
  j["train_env"] = env_to_json(spec.train_env);
  j["test_env"] = env_to_json(spec.test_env);
  j["counts"] = {{"train", spec.counts.train}, {"val", spec.counts.val}, {"test", spec.counts.test}};
  return j;
}

std::uint64_t task_spec_hash(const TaskSpec& spec) {
  return Fnv64{}.text(task_spec_to_json(spec).dump()).digest();
}

nlohmann::ordered_json dataset_metadata(const TaskSpec& spec) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(task_spec_hash(spec)));
  j["spec_hash"] = hex;
  j["task"] = task_spec_to_json(spec);
  j["environments"] = {{"train", env_to_json(spec.train_env)},
                       {"val", env_to_json(spec.train_env)},
                       {"test", env_to_json(spec.test_env)}};
  bool attributed = false;
  for (const auto& c : spec.classes) attributed |= c.graphon.attributed();
  auto dict = nlohmann::ordered_json::object();
  if (attributed) {
    for (std::size_t i = 0; i < kColorNames.size(); ++i) dict[std::to_string(i)] = kColorNames[i];
  } else {
    dict["0"] = "null";
  }
  j["attribute_dictionary"] = std::move(dict);
  j["counts"] = {{"train", spec.counts.train}, {"val", spec.counts.val}, {"test", spec.counts.test}};
  return j;
}

TaskSpec er_size_task(std::uint64_t seed) {
  TaskSpec spec;
  spec.name = "er_size";
  spec.seed = seed;
  const double ps[] = {0.2, 0.5, 0.8};
  for (int i = 0; i < 3; ++i) spec.classes.push_back({Graphon(ErGraphon{ps[i]}), i});
  spec.train_env.sizes = {80};
  spec.test_env.sizes = {140};
  spec.counts = {80, 40, 100};
  return spec;
}

TaskSpec sbm_attributed_task(std::uint64_t seed) {
  TaskSpec spec;
  spec.name = "sbm_attributed";
  spec.seed = seed;
  const double cross[] = {0.1, 0.3};
  for (int i = 0; i < 2; ++i) {
    SbmGraphon sbm{{0.0, 0.5, 1.0}, {{0.2, cross[i]}, {cross[i], 0.2}}, true};
    spec.classes.push_back({Graphon(std::move(sbm)), i});
  }
  spec.train_env.sizes = {20};
  spec.train_env.attr_cuts = attr_cuts_from_frequencies(0.9, 0.9);
  spec.test_env.sizes = {40};
  spec.test_env.attr_cuts = attr_cuts_from_frequencies(0.1, 0.1);
  spec.counts = {80, 20, 100};
  return spec;
}

}  // namespace ginv
