#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <Eigen/Core>

#include "ginv/app.hpp"
#include "ginv/census_cache.hpp"
#include "ginv/errors.hpp"
#include "ginv/graph_io.hpp"
#include "ginv/hash.hpp"
#include "../util/byte_io.hpp"

#ifndef GINV_VERSION
#define GINV_VERSION "0.0.0"
#endif
#ifndef GINV_GIT_REVISION
#define GINV_GIT_REVISION "unknown"
#endif

namespace ginv::app {

namespace fs = std::filesystem;

std::vector<int> CensusSettings::sizes() const {
  std::vector<int> out;
  for (int s = le_k ? std::min(3, k) : k; s <= k; ++s) out.push_back(s);
  return out;
}

CensusRequest CensusSettings::request(int size) const {
  CensusRequest req;
  req.k = size;
  req.norm = norm;
  req.mode = mode;
  if (mode == CensusMode::kSampled) {
    req.samples = samples;
    req.seed = seed;
  }
  return req;
}

nlohmann::ordered_json CensusSettings::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["le_k"] = le_k;
  j["norm"] = norm_name(norm);
  j["mode"] = census_mode_name(mode);
  if (mode == CensusMode::kSampled) {
    j["samples"] = samples;
    j["seed"] = seed;
  }
  return j;
}

CensusSettings CensusSettings::from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field + ": must be an object");
  CensusSettings c;
  for (const auto& [key, value] : j.items()) {
    const std::string name = field + "." + key;
    try {
      if (key == "k") {
        c.k = value.get<int>();
      } else if (key == "le_k") {
        c.le_k = value.get<bool>();
      } else if (key == "norm") {
        c.norm = parse_norm(value.get<std::string>());
      } else if (key == "mode") {
        c.mode = parse_census_mode(value.get<std::string>());
      } else if (key == "samples") {
        c.samples = value.get<std::uint64_t>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else {
        throw ConfigError(name + ": unknown field");
      }
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(name + ": wrong type");
    }
  }
  if (c.k < 1 || c.k > kMaxPatternSize) throw ConfigError(field + ".k: must be in [1, 8]");
  if (c.mode == CensusMode::kSampled && c.samples == 0) throw ConfigError(field + ".samples: must be >= 1");
  return c;
}

// ---------------------------------------------------------------------------
// Datasets

const std::vector<Graph>& Dataset::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    case Split::kTest: return test;
  }
  return train;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + " is not valid JSON: " + e.what());
  }
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("dataset directory " + dir.string() + " does not exist");
  Dataset d;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const fs::path file = dir / (std::string(split_name(s)) + ".jsonl");
    if (!fs::exists(file)) throw DataError("dataset file " + file.string() + " is missing");
    auto graphs = read_graphs(file);
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      if (!graphs[i].label()) {
        throw DataError(file.string() + ": graph " + std::to_string(i) + " has no label");
      }
    }
    (s == Split::kTrain ? d.train : s == Split::kVal ? d.val : d.test) = std::move(graphs);
  }
  const fs::path meta = dir / "metadata.json";
  if (fs::exists(meta)) {
    try {
      d.metadata = nlohmann::ordered_json::parse(std::ifstream(meta));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(meta.string() + " is not valid JSON: " + e.what());
    }
    if (d.metadata.contains("spec_hash") && d.metadata["spec_hash"].is_string()) {
      d.task_hash = std::stoull(d.metadata["spec_hash"].get<std::string>(), nullptr, 16);
    }
  }
  return d;
}

void write_dataset(const fs::path& dir, const TaskDatasets& data, const TaskSpec& spec) {
  fs::create_directories(dir);
  write_graphs(dir / "train.jsonl", data.train);
  write_graphs(dir / "val.jsonl", data.val);
  write_graphs(dir / "test.jsonl", data.test);
  detail::atomic_write(dir / "metadata.json", dataset_metadata(spec).dump(2) + "\n");
}

fs::path cache_file(const fs::path& cache_dir, Split s) {
  return cache_dir / (std::string(split_name(s)) + ".gcache");
}

std::vector<PatternDensities> split_densities(const std::vector<Graph>& graphs, Split s,
                                              const CensusSettings& census,
                                              const std::optional<fs::path>& cache_dir,
                                              bool compute_missing, int threads, const Io& io) {
  std::optional<fs::path> file;
  if (cache_dir) file = cache_file(*cache_dir, s);
  std::vector<std::vector<DensityVector>> per_size;
  for (int size : census.sizes()) {
    const CensusRequest req = census.request(size);
    if (!compute_missing) {
      if (!file || !fs::exists(*file)) {
        throw DataError(std::string("no census cache for the ") + split_name(s) +
                        " split; run the census command first or pass --census-inline");
      }
      CensusCache cache(*file);
      cache.load();
      std::size_t missing = 0;
      for (const Graph& g : graphs) missing += cache.find(cache_key_for(g, req)) ? 0 : 1;
      if (missing > 0) {
        throw DataError("census cache " + file->string() + " lacks " + std::to_string(missing) +
                        " graphs for k=" + std::to_string(size) + " " + norm_name(census.norm) + " " +
                        census_mode_name(census.mode) + "; run the census command or pass --census-inline");
      }
    }
    CensusStats stats;
    per_size.push_back(census_dataset(graphs, req, file, threads, &stats));
    io.note(std::string(split_name(s)) + " k=" + std::to_string(size) + ": " + std::to_string(stats.cache_hits) +
            " cached, " + std::to_string(stats.computed) + " computed" +
            (stats.corrupt_records ? ", " + std::to_string(stats.corrupt_records) + " corrupt records replaced" : ""));
  }
  std::vector<PatternDensities> out(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    std::vector<DensityVector> blocks;
    for (auto& dvs : per_size) blocks.push_back(std::move(dvs[i]));
    out[i] = assemble_le_k(blocks);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Formatting and manifests

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_manifest(const fs::path& dir, const std::string& command, const nlohmann::ordered_json& config,
                    std::optional<std::uint64_t> seed, const std::vector<std::string>& artifacts,
                    double wall_clock_seconds, int threads) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["config_hash"] = hex64(Fnv64{}.text(config.dump()).digest());
  m["config"] = config;
  if (seed) {
    m["seed"] = *seed;
  } else {
    m["seed"] = nullptr;
  }
  m["artifacts"] = artifacts;
  m["threads"] = threads;
  m["versions"] = {{"ginv", GINV_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  m["git_revision"] = GINV_GIT_REVISION;
  m["wall_clock_seconds"] = wall_clock_seconds;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m["finished_at"] = stamp;
  detail::atomic_write(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace ginv::app
