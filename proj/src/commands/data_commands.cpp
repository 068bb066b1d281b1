#include <chrono>
#include <set>
#include <sstream>

#include "ginv/app.hpp"
#include "ginv/errors.hpp"
#include "ginv/vocabulary.hpp"
#include "../util/byte_io.hpp"

namespace ginv::app {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string attrs_string(const PatternCode& c) {
  std::string s;
  for (int i = 0; i < c.k; ++i) {
    if (i) s += ',';
    s += std::to_string(c.attrs[i]);
  }
  return s;
}

}  // namespace

void cmd_gen(const GenCommand& cmd, const Io& io) {
  const auto t0 = std::chrono::steady_clock::now();
  TaskSpec spec;
  if (!cmd.common.config.empty()) {
    spec = load_task_spec(cmd.common.config);
  } else if (cmd.task == "er") {
    spec = er_size_task();
  } else if (cmd.task == "sbm") {
    spec = sbm_attributed_task();
  } else {
    throw ConfigError("--task: expected er or sbm, got \"" + cmd.task + "\"");
  }
  if (cmd.common.seed) spec.seed = *cmd.common.seed;
  spec.validate();
  const fs::path out = cmd.common.out.empty() ? fs::path("data") : fs::path(cmd.common.out);
  TaskDatasets data = generate_task(spec, cmd.common.threads);
  write_dataset(out, data, spec);
  nlohmann::ordered_json config;
  config["task"] = task_spec_to_json(spec);
  write_manifest(out, "gen", config, spec.seed, {"train.jsonl", "val.jsonl", "test.jsonl", "metadata.json"},
                 seconds_since(t0), cmd.common.threads);
  io.print("wrote " + std::to_string(data.train.size()) + " train, " + std::to_string(data.val.size()) + " val, " +
           std::to_string(data.test.size()) + " test graphs to " + out.string() + "\n");
}

void cmd_vocab(const VocabCommand& cmd, const Io& io) {
  if (cmd.alphabet.empty()) throw ConfigError("--alphabet: must name at least one attribute id");
  Vocabulary vocab = cmd.le_k ? enumerate_vocabulary_up_to(cmd.k, cmd.alphabet)
                              : enumerate_vocabulary(cmd.k, cmd.alphabet);
  std::ostringstream os;
  if (cmd.header) os << "index\ttopo_bits\tattrs\taut_count\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    os << i << '\t' << vocab[i].topo_bits << '\t' << attrs_string(vocab[i]) << '\t' << vocab[i].aut_count << '\n';
  }
  io.print(os.str());
}

void cmd_census(const CensusCommand& cmd, const Io& io) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cmd.data.empty()) throw ConfigError("--data: dataset directory is required");
  CensusSettings census = cmd.census;
  if (cmd.common.seed) census.seed = *cmd.common.seed;
  if (census.mode == CensusMode::kSampled && census.samples == 0) throw ConfigError("--samples: must be >= 1");
  const fs::path cache_dir = !cmd.cache_dir.empty()    ? fs::path(cmd.cache_dir)
                             : !cmd.common.out.empty() ? fs::path(cmd.common.out)
                                                       : fs::path(cmd.data) / "cache";
  const fs::path out = cmd.common.out.empty() ? cache_dir : fs::path(cmd.common.out);
  fs::create_directories(out);
  const Dataset data = load_dataset(cmd.data);

  nlohmann::ordered_json summary;
  summary["census"] = census.to_json();
  summary["task_hash"] = hex64(data.task_hash);
  std::vector<std::string> artifacts;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const auto& graphs = data.split(s);
    auto dens = split_densities(graphs, s, census, cache_dir, true, cmd.common.threads, io);
    std::ostringstream csv;
    csv << "graph,k,topo_bits,attrs,aut_count,count,density\n";
    std::set<PatternCode> distinct;
    for (std::size_t g = 0; g < dens.size(); ++g) {
      for (const auto& e : dens[g].entries) {
        distinct.insert(e.code);
        csv << g << ',' << int(e.code.k) << ',' << e.code.topo_bits << ",\"" << attrs_string(e.code) << "\","
            << e.code.aut_count << ',' << e.count << ',' << format_double(e.density) << '\n';
      }
    }
    const std::string name = std::string("densities_") + split_name(s) + ".csv";
    detail::atomic_write(out / name, csv.str());
    artifacts.push_back(name);
    summary["splits"][split_name(s)] = {{"graphs", graphs.size()}, {"distinct_patterns", distinct.size()}};
  }
  detail::atomic_write(out / "census.json", summary.dump(2) + "\n");
  artifacts.push_back("census.json");
  nlohmann::ordered_json config;
  config["data"] = cmd.data;
  config["census"] = census.to_json();
  write_manifest(out, "census", config,
                 census.mode == CensusMode::kSampled ? std::optional<std::uint64_t>(census.seed) : std::nullopt,
                 artifacts, seconds_since(t0), cmd.common.threads);
  io.print("census " + std::string(norm_name(census.norm)) + " k=" + std::to_string(census.k) + " written to " +
           out.string() + "\n");
}

}  // namespace ginv::app
