#include <algorithm>
#include <fstream>
#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>

#include "ginv/app.hpp"
#include "ginv/errors.hpp"
#include "ginv/parallel.hpp"
#include "training.hpp"
#include "../util/byte_io.hpp"

namespace ginv::app {

namespace fs = std::filesystem;
using detail::MeanStd;

namespace {

constexpr std::array<const char*, 3> kSplitNames{"train", "val", "test"};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string seed_dir(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seed_%02d", index);
  return buf;
}

nlohmann::ordered_json hp_json(const HyperParams& hp) {
  return {{"learning_rate", hp.learning_rate}, {"hidden", hp.hidden}, {"layers", hp.layers},
          {"reg_weight", hp.reg_weight}};
}

nlohmann::ordered_json metrics_json(const Metrics& m) {
  return {{"loss", m.loss}, {"accuracy", m.accuracy}, {"mcc", m.mcc}, {"confusion", m.confusion}};
}

nlohmann::ordered_json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

std::array<MeanStd, 3> accuracy_stats(const std::vector<std::array<Metrics, 3>>& runs) {
  std::array<MeanStd, 3> out;
  for (int s = 0; s < 3; ++s) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r[s].accuracy);
    out[s] = detail::mean_std(v);
  }
  return out;
}

// Serializes log notes coming from worker threads.
Io locked(const Io& io, std::mutex& m) {
  Io out = io;
  if (io.log) {
    out.log = [&io, &m](std::string_view s) {
      std::lock_guard lock(m);
      io.log(s);
    };
  }
  return out;
}

TrainConfig load_train_config(const TrainCommand& cmd) {
  TrainConfig cfg;
  if (!cmd.common.config.empty()) {
    const auto j = read_json_file(cmd.common.config);
    cfg = parse_train_config(j.contains("train") ? j["train"] : j);
  } else if (cmd.train_config) {
    cfg = *cmd.train_config;
  }
  if (cmd.common.seed) cfg.base_seed = *cmd.common.seed;
  cfg.validate();
  return cfg;
}

}  // namespace

void cmd_train(const TrainCommand& cmd, const Io& io_in) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mutex log_mutex;
  const Io io = locked(io_in, log_mutex);
  if (cmd.data.empty()) throw ConfigError("--data: dataset directory is required");
  const TrainConfig cfg = load_train_config(cmd);
  const fs::path out = cmd.common.out.empty() ? fs::path("train") : fs::path(cmd.common.out);
  const fs::path cache_dir = cmd.cache_dir.empty() ? fs::path(cmd.data) / "cache" : fs::path(cmd.cache_dir);
  if (cmd.census.k < 1 || cmd.census.k > kMaxPatternSize) throw ConfigError("--k: must be in [1, 8]");

  const Dataset data = load_dataset(cmd.data);
  const detail::PreparedTask task =
      detail::prepare_task(data, cmd.repr, cmd.census, cache_dir, cmd.census_inline, cmd.common.threads, io);

  const std::vector<HyperParams> grid = cfg.grid();
  const std::size_t runs = grid.size() * static_cast<std::size_t>(cfg.seeds);
  const bool single = grid.size() == 1;
  std::vector<detail::RunResult> results(runs);
  parallel_for(runs, cmd.common.threads, [&](std::size_t i) {
    const auto& hp = grid[i / cfg.seeds];
    results[i] = detail::run_one(task, hp, cfg, static_cast<int>(i % cfg.seeds), single);
    io.note(std::string(repr_kind_name(cmd.repr)) + " lr=" + format_double(hp.learning_rate) +
            " hidden=" + std::to_string(hp.hidden) + " layers=" + std::to_string(hp.layers) +
            " reg=" + format_double(hp.reg_weight) + " seed " + std::to_string(i % cfg.seeds) +
            ": val " + format_double(results[i].metrics[1].accuracy) + " test " +
            format_double(results[i].metrics[2].accuracy));
  });

  // Model selection by mean validation accuracy; the first grid point wins ties.
  std::ostringstream grid_csv;
  grid_csv << "learning_rate,hidden,layers,reg_weight,train_mean,train_std,val_mean,val_std,test_mean,test_std\n";
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<std::array<Metrics, 3>> ms;
    for (int s = 0; s < cfg.seeds; ++s) ms.push_back(results[g * cfg.seeds + s].metrics);
    const auto acc = accuracy_stats(ms);
    grid_csv << format_double(grid[g].learning_rate) << ',' << grid[g].hidden << ',' << grid[g].layers << ','
             << format_double(grid[g].reg_weight);
    for (const auto& a : acc) grid_csv << ',' << format_double(a.mean) << ',' << format_double(a.std);
    grid_csv << '\n';
    if (acc[1].mean > best_val) {
      best_val = acc[1].mean;
      best = g;
    }
  }

  std::vector<detail::RunResult> selected;
  if (single) {
    selected = std::move(results);
  } else {
    selected.resize(cfg.seeds);
    parallel_for(selected.size(), cmd.common.threads, [&](std::size_t s) {
      selected[s] = detail::run_one(task, grid[best], cfg, static_cast<int>(s), true);
    });
  }

  fs::create_directories(out);
  std::vector<std::string> artifacts{"grid.csv", "summary.json"};
  ginv::detail::atomic_write(out / "grid.csv", grid_csv.str());
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  std::vector<std::array<Metrics, 3>> ms;
  for (const auto& r : selected) {
    const fs::path dir = out / "runs" / seed_dir(r.seed_index);
    fs::create_directories(dir);
    ginv::detail::atomic_write(dir / "metrics.csv", detail::metrics_csv(r.train));
    nlohmann::ordered_json run;
    run["seed_index"] = r.seed_index;
    run["seed"] = r.seed;
    run["config"] = hp_json(r.hp);
    run["best_epoch"] = r.train.best_epoch;
    run["best_val_accuracy"] = r.train.best_val_accuracy;
    for (int s = 0; s < 3; ++s) run["metrics"][kSplitNames[s]] = metrics_json(r.metrics[s]);
    if (cmd.repr == ReprKind::kOneHot) run["dropped_test_patterns"] = r.dropped_test_patterns;
    ginv::detail::atomic_write(dir / "summary.json", run.dump(2) + "\n");
    save_checkpoint(dir / "model.ckpt", *r.checkpoint);
    const std::string rel = "runs/" + seed_dir(r.seed_index) + "/";
    artifacts.insert(artifacts.end(), {rel + "metrics.csv", rel + "summary.json", rel + "model.ckpt"});
    seeds.push_back({{"seed_index", r.seed_index},
                     {"best_epoch", r.train.best_epoch},
                     {"train_accuracy", r.metrics[0].accuracy},
                     {"val_accuracy", r.metrics[1].accuracy},
                     {"test_accuracy", r.metrics[2].accuracy},
                     {"test_mcc", r.metrics[2].mcc}});
    ms.push_back(r.metrics);
  }
  const auto acc = accuracy_stats(ms);
  nlohmann::ordered_json summary;
  summary["representation"] = repr_kind_name(cmd.repr);
  summary["census"] = cmd.census.to_json();
  summary["train"] = train_config_to_json(cfg);
  summary["selected"] = hp_json(grid[best]);
  summary["runs"] = seeds;
  for (int s = 0; s < 3; ++s) summary["accuracy"][kSplitNames[s]] = mean_std_json(acc[s]);
  std::vector<double> mcc;
  for (const auto& m : ms) mcc.push_back(m[2].mcc);
  summary["test_mcc"] = mean_std_json(detail::mean_std(mcc));
  ginv::detail::atomic_write(out / "summary.json", summary.dump(2) + "\n");

  nlohmann::ordered_json config;
  config["data"] = cmd.data;
  config["representation"] = repr_kind_name(cmd.repr);
  config["census"] = cmd.census.to_json();
  config["train"] = train_config_to_json(cfg);
  write_manifest(out, "train", config, cfg.base_seed, artifacts, seconds_since(t0), cmd.common.threads);
  io.print(detail::table_row(repr_kind_name(cmd.repr), acc) + "\n");
}

void cmd_eval(const EvalCommand& cmd, const Io& io) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cmd.data.empty()) throw ConfigError("--data: dataset directory is required");
  if (cmd.model.empty()) throw ConfigError("--model: directory of a train run is required");
  const fs::path runs = fs::path(cmd.model) / "runs";
  std::vector<fs::path> ckpts;
  if (fs::is_directory(runs)) {
    for (const auto& e : fs::directory_iterator(runs)) {
      if (fs::exists(e.path() / "model.ckpt")) ckpts.push_back(e.path() / "model.ckpt");
    }
  }
  if (ckpts.empty()) throw DataError("no checkpoints under " + runs.string());
  std::sort(ckpts.begin(), ckpts.end());

  std::vector<Checkpoint> models;
  for (const auto& p : ckpts) models.push_back(load_checkpoint(p));
  const CensusSettings census = detail::checkpoint_census(models[0]);
  const ReprKind kind = detail::checkpoint_kind(models[0]);
  for (const auto& m : models) {
    const CensusSettings c = detail::checkpoint_census(m);
    if (c.to_json() != census.to_json() || detail::checkpoint_kind(m) != kind) {
      throw DataError("checkpoints under " + runs.string() + " disagree on their settings");
    }
  }
  if (cmd.k && *cmd.k != census.k) {
    throw DataError("vocabulary mismatch: checkpoint uses k=" + std::to_string(census.k) + " but k=" +
                    std::to_string(*cmd.k) + " was requested");
  }
  if (cmd.norm && *cmd.norm != census.norm) {
    throw DataError(std::string("vocabulary mismatch: checkpoint uses norm ") + norm_name(census.norm) + " but " +
                    norm_name(*cmd.norm) + " was requested");
  }

  const Dataset data = load_dataset(cmd.data);
  if (data.task_hash != 0 && models[0].task_hash != 0 && data.task_hash != models[0].task_hash) {
    io.note("note: dataset task hash " + hex64(data.task_hash) + " differs from the training task " +
            hex64(models[0].task_hash));
  }
  const fs::path cache_dir = cmd.cache_dir.empty() ? fs::path(cmd.data) / "cache" : fs::path(cmd.cache_dir);
  const detail::PreparedTask task =
      detail::prepare_task(data, kind, census, cache_dir, cmd.census_inline, cmd.common.threads, io);

  std::vector<std::array<Metrics, 3>> ms(models.size());
  parallel_for(models.size(), cmd.common.threads,
               [&](std::size_t i) { ms[i] = detail::evaluate_checkpoint(models[i], task, nullptr); });

  const fs::path out = cmd.common.out.empty() ? fs::path(cmd.model) / "eval" : fs::path(cmd.common.out);
  fs::create_directories(out);
  std::ostringstream csv;
  csv << "run,split,loss,accuracy,mcc\n";
  nlohmann::ordered_json per_run = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string run = ckpts[i].parent_path().filename().string();
    nlohmann::ordered_json r;
    r["run"] = run;
    for (int s = 0; s < 3; ++s) {
      csv << run << ',' << kSplitNames[s] << ',' << format_double(ms[i][s].loss) << ','
          << format_double(ms[i][s].accuracy) << ',' << format_double(ms[i][s].mcc) << '\n';
      r[kSplitNames[s]] = metrics_json(ms[i][s]);
    }
    per_run.push_back(std::move(r));
  }
  const auto acc = accuracy_stats(ms);
  nlohmann::ordered_json summary;
  summary["representation"] = repr_kind_name(kind);
  summary["census"] = census.to_json();
  for (int s = 0; s < 3; ++s) summary["accuracy"][kSplitNames[s]] = mean_std_json(acc[s]);
  std::vector<double> mcc;
  for (const auto& m : ms) mcc.push_back(m[2].mcc);
  summary["test_mcc"] = mean_std_json(detail::mean_std(mcc));
  summary["runs"] = std::move(per_run);
  ginv::detail::atomic_write(out / "eval.csv", csv.str());
  ginv::detail::atomic_write(out / "eval.json", summary.dump(2) + "\n");

  nlohmann::ordered_json config;
  config["data"] = cmd.data;
  config["model"] = cmd.model;
  config["census"] = census.to_json();
  write_manifest(out, "eval", config, std::nullopt, {"eval.csv", "eval.json"}, seconds_since(t0),
                 cmd.common.threads);
  io.print(detail::table_row(repr_kind_name(kind), acc) + "\n");
}

void cmd_pipeline(const PipelineCommand& cmd, const Io& io) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cmd.common.config.empty()) throw ConfigError("--config: the pipeline needs a config file");
  const nlohmann::json j = read_json_file(cmd.common.config);
  if (!j.is_object()) throw ConfigError("pipeline: must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "task" && key != "census" && key != "models") throw ConfigError("pipeline." + key + ": unknown field");
  }
  const fs::path out = cmd.common.out.empty() ? fs::path("pipeline") : fs::path(cmd.common.out);

  // Data.
  GenCommand gen;
  gen.common = cmd.common;
  gen.common.config.clear();
  gen.common.out = (out / "data").string();
  TaskSpec spec;
  if (!j.contains("task")) throw ConfigError("pipeline.task: missing");
  if (j["task"].is_string()) {
    gen.task = j["task"].get<std::string>();
  } else {
    spec = parse_task_spec(j["task"]);
    const fs::path task_file = out / "task.json";
    fs::create_directories(out);
    nlohmann::ordered_json wrapped;
    wrapped["task"] = task_spec_to_json(spec);
    ginv::detail::atomic_write(task_file, wrapped.dump(2) + "\n");
    gen.common.config = task_file.string();
  }
  cmd_gen(gen, io);

  // Census.
  CensusSettings census;
  if (j.contains("census")) census = CensusSettings::from_json(j["census"], "pipeline.census");
  if (!j.contains("models") || !j["models"].is_array() || j["models"].empty()) {
    throw ConfigError("pipeline.models: must be a nonempty list");
  }
  struct ModelEntry {
    std::string name;
    ReprKind kind;
    TrainConfig train;
  };
  std::vector<ModelEntry> models;
  bool needs_census = false;
  for (std::size_t i = 0; i < j["models"].size(); ++i) {
    const auto& m = j["models"][i];
    const std::string field = "pipeline.models[" + std::to_string(i) + "]";
    if (!m.is_object() || !m.contains("representation") || !m["representation"].is_string()) {
      throw ConfigError(field + ".representation: missing");
    }
    for (const auto& [key, value] : m.items()) {
      if (key != "representation" && key != "name" && key != "train") throw ConfigError(field + "." + key + ": unknown field");
    }
    ModelEntry e;
    e.kind = parse_repr_kind(m["representation"].get<std::string>());
    e.name = m.contains("name") ? m["name"].get<std::string>() : std::string(repr_kind_name(e.kind));
    if (m.contains("train")) e.train = parse_train_config(m["train"]);
    if (cmd.common.seed) e.train.base_seed = *cmd.common.seed;
    needs_census |= e.kind != ReprKind::kGinBaseline;
    models.push_back(std::move(e));
  }
  const fs::path data_dir = out / "data";
  const fs::path cache_dir = out / "cache";
  if (needs_census) {
    CensusCommand c;
    c.common = cmd.common;
    c.common.config.clear();
    c.common.seed.reset();
    c.common.out = cache_dir.string();
    c.data = data_dir.string();
    c.census = census;
    cmd_census(c, io);
  }

  // Models.
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::vector<std::string> artifacts{"pipeline.json"};
  for (const auto& m : models) {
    TrainCommand t;
    t.common = cmd.common;
    t.common.config.clear();
    t.common.seed.reset();
    t.common.out = (out / m.name).string();
    t.data = data_dir.string();
    t.cache_dir = cache_dir.string();
    t.repr = m.kind;
    t.census = census;
    t.train_config = m.train;
    std::string row;
    Io capture = io;
    capture.out = [&row](std::string_view s) { row += s; };
    cmd_train(t, capture);

    EvalCommand ev;
    ev.common = cmd.common;
    ev.common.config.clear();
    ev.common.seed.reset();
    ev.common.out = (out / m.name / "eval").string();
    ev.data = data_dir.string();
    ev.cache_dir = cache_dir.string();
    ev.model = (out / m.name).string();
    std::string eval_row;
    capture.out = [&eval_row](std::string_view s) { eval_row += s; };
    cmd_eval(ev, capture);

    const auto summary = read_json_file(out / m.name / "eval" / "eval.json");
    rows.push_back({{"name", m.name}, {"representation", repr_kind_name(m.kind)}, {"accuracy", nlohmann::ordered_json::parse(summary["accuracy"].dump())},
                    {"test_mcc", nlohmann::ordered_json::parse(summary["test_mcc"].dump())}});
    io.print(eval_row);
  }
  nlohmann::ordered_json report;
  report["census"] = census.to_json();
  report["models"] = rows;
  ginv::detail::atomic_write(out / "pipeline.json", report.dump(2) + "\n");
  write_manifest(out, "pipeline", nlohmann::ordered_json(j), cmd.common.seed, artifacts, seconds_since(t0),
                 cmd.common.threads);
}

}  // namespace ginv::app
