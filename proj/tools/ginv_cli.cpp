#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ginv/ginv.h"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace {

void sink(int channel, const char* text, size_t len, void* /*user*/) {
  std::FILE* f = channel == 1 ? stdout : stderr;
  std::fwrite(text, 1, len, f);
  std::fflush(f);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

struct Global {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  int threads = 1;

  ginv_common_options options() const {
    ginv_common_options o;
    ginv_common_options_init(&o);
    o.config = opt(config);
    o.out = opt(out);
    o.seed_set = seed.has_value();
    o.seed = seed.value_or(0);
    o.threads = threads;
    return o;
  }
};

struct CensusFlags {
  int k = 5;
  bool le_k = false;
  std::string norm = "omega";
  std::string mode = "exact";
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;

  void add(CLI::App* sub, bool with_seed) {
    sub->add_option("--k", k, "Pattern size")->check(CLI::Range(1, 8));
    sub->add_flag("--le-k", le_k, "Use every pattern size from min(3, k) to k");
    sub->add_option("--norm", norm, "Density normalization")->check(CLI::IsMember({"tind", "omega"}));
    sub->add_option("--mode", mode, "Census mode")->check(CLI::IsMember({"exact", "sampled"}));
    sub->add_option("--samples", samples, "Draws per graph in sampled mode")->check(CLI::PositiveNumber);
    if (with_seed) sub->add_option("--census-seed", seed, "Seed of the sampled census to read");
  }

  ginv_census_options options() const {
    ginv_census_options o;
    ginv_census_options_init(&o);
    o.k = k;
    o.le_k = le_k;
    o.norm = norm.c_str();
    o.mode = mode.c_str();
    o.samples = samples;
    o.seed = seed;
    return o;
  }
};

int finish(ginv_status s) {
  if (s == GINV_OK) return 0;
  std::fprintf(stderr, "error: %s\n", ginv_last_error());
  // Exit codes stop at 3; unexpected failures are reported as data errors.
  return s == GINV_E_INTERNAL ? GINV_E_DATA : static_cast<int>(s);
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Training allocates and frees multi-megabyte temporaries every epoch. Keep
  // them on the heap so they are not mapped and zeroed again each time.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
  CLI::App app{"Subgraph-density graph representations"};
  app.set_version_flag("--version", std::string(ginv_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--config", g.config, "Configuration file (JSON)");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory");

  auto* gen = app.add_subcommand("gen", "Generate a task dataset");
  std::string task = "er";
  gen->add_option("--task", task, "Built-in task used without --config")->check(CLI::IsMember({"er", "sbm"}));

  auto* vocab = app.add_subcommand("vocab", "List connected patterns");
  int vocab_k = 3;
  std::vector<int> alphabet{0};
  bool vocab_le_k = false, header = false;
  vocab->add_option("--k", vocab_k, "Pattern size")->required()->check(CLI::Range(1, 8));
  vocab->add_option("--alphabet", alphabet, "Vertex attribute ids")->delimiter(',')->check(CLI::Range(0, 255));
  vocab->add_flag("--le-k", vocab_le_k, "List every size from 1 to k");
  vocab->add_flag("--header", header, "Print a column header");

  std::string data, cache_dir;
  auto* census = app.add_subcommand("census", "Compute and cache subgraph densities");
  CensusFlags census_flags;
  census->add_option("--data", data, "Dataset directory")->required();
  census->add_option("--cache-dir", cache_dir, "Cache directory");
  census_flags.add(census, false);

  auto* train = app.add_subcommand("train", "Train a representation and classifier");
  CensusFlags train_census;
  std::string repr = "one_hot";
  bool census_inline = false;
  train->add_option("--data", data, "Dataset directory")->required();
  train->add_option("--cache-dir", cache_dir, "Census cache directory");
  train->add_option("--repr", repr, "Representation")
      ->check(CLI::IsMember({"one_hot", "gin", "gin_plus", "gin_baseline"}));
  train->add_flag("--census-inline", census_inline, "Compute missing censuses instead of failing");
  train_census.add(train, true);

  auto* eval = app.add_subcommand("eval", "Evaluate trained checkpoints");
  std::string model, eval_norm;
  int eval_k = 0;
  eval->add_option("--data", data, "Dataset directory")->required();
  eval->add_option("--cache-dir", cache_dir, "Census cache directory");
  eval->add_option("--model", model, "Output directory of a train run")->required();
  eval->add_option("--k", eval_k, "Expected pattern size")->check(CLI::Range(1, 8));
  eval->add_option("--norm", eval_norm, "Expected normalization")->check(CLI::IsMember({"tind", "omega"}));
  eval->add_flag("--census-inline", census_inline, "Compute missing censuses instead of failing");

  auto* bound = app.add_subcommand("bound-check", "Monte-Carlo check of the density concentration bound");
  double er_p = -1.0;
  std::vector<std::uint32_t> sizes;
  int bound_k = 0, trials = 0;
  std::vector<double> epsilons;
  bool cross = false;
  bound->add_option("--p", er_p, "Edge probability of an ER graphon")->check(CLI::Range(0.0, 1.0));
  bound->add_option("--sizes", sizes, "Graph sizes")->delimiter(',');
  bound->add_option("--k", bound_k, "Largest pattern size")->check(CLI::Range(1, 8));
  bound->add_option("--epsilons", epsilons, "Deviation thresholds")->delimiter(',');
  bound->add_option("--trials", trials, "Graph pairs per cell")->check(CLI::PositiveNumber);
  bound->add_flag("--cross-sizes", cross, "Also compare every pair of distinct sizes");

  auto* pipeline = app.add_subcommand("pipeline", "Generate, census, train and evaluate from one config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : GINV_E_USAGE;
  }

  const ginv_common_options common = g.options();
  if (gen->parsed()) return finish(ginv_cmd_gen(&common, task.c_str(), sink, nullptr));
  if (vocab->parsed()) {
    std::vector<std::uint8_t> a(alphabet.begin(), alphabet.end());
    return finish(ginv_cmd_vocab(vocab_k, a.data(), a.size(), vocab_le_k, header, sink, nullptr));
  }
  if (census->parsed()) {
    const auto c = census_flags.options();
    return finish(ginv_cmd_census(&common, data.c_str(), opt(cache_dir), &c, sink, nullptr));
  }
  if (train->parsed()) {
    const auto c = train_census.options();
    return finish(
        ginv_cmd_train(&common, data.c_str(), opt(cache_dir), repr.c_str(), &c, census_inline, sink, nullptr));
  }
  if (eval->parsed()) {
    return finish(ginv_cmd_eval(&common, data.c_str(), opt(cache_dir), model.c_str(), eval_k, opt(eval_norm),
                                census_inline, sink, nullptr));
  }
  if (bound->parsed()) {
    ginv_bound_check_options o;
    ginv_bound_check_options_init(&o);
    o.er_p = er_p;
    o.sizes = sizes.data();
    o.num_sizes = sizes.size();
    o.k = bound_k;
    o.epsilons = epsilons.data();
    o.num_epsilons = epsilons.size();
    o.trials = trials;
    o.cross_sizes = cross;
    return finish(ginv_cmd_bound_check(&common, &o, sink, nullptr));
  }
  if (pipeline->parsed()) return finish(ginv_cmd_pipeline(&common, sink, nullptr));
  return GINV_E_USAGE;
}
