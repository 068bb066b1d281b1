#include "ginv/ginv.h"

#include <exception>
#include <new>
#include <string>

#include "ginv/app.hpp"
#include "ginv/census.hpp"
#include "ginv/errors.hpp"
#include "ginv/graph_io.hpp"
#include "ginv/vocabulary.hpp"

#ifndef GINV_VERSION
#define GINV_VERSION "0.0.0"
#endif

struct ginv_vocab {
  ginv::Vocabulary vocab;
};

struct ginv_graphs {
  std::vector<ginv::Graph> graphs;
};

struct ginv_census {
  std::vector<ginv::DensityVector> densities;
};

namespace {

thread_local std::string last_error;

ginv_status fail(ginv_status s, const std::string& what) {
  last_error = what;
  return s;
}

// Runs fn, mapping exceptions onto status codes and the thread's last error.
template <typename Fn>
ginv_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return GINV_OK;
  } catch (const ginv::Error& e) {
    return fail(static_cast<ginv_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GINV_E_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(GINV_E_DATA, e.what());
  } catch (const std::exception& e) {
    return fail(GINV_E_INTERNAL, e.what());
  }
}

ginv::app::Io make_io(ginv_sink sink, void* user) {
  ginv::app::Io io;
  if (sink) {
    io.out = [sink, user](std::string_view s) { sink(1, s.data(), s.size(), user); };
    io.log = [sink, user](std::string_view s) {
      std::string line(s);
      line += '\n';
      sink(2, line.data(), line.size(), user);
    };
  }
  return io;
}

std::string str(const char* s) { return s ? std::string(s) : std::string(); }

ginv::app::Common common_from(const ginv_common_options* o) {
  ginv::app::Common c;
  if (!o) return c;
  c.config = str(o->config);
  c.out = str(o->out);
  if (o->seed_set) c.seed = o->seed;
  if (o->threads < 1) throw ginv::ConfigError("--threads: must be >= 1");
  c.threads = o->threads;
  return c;
}

ginv::app::CensusSettings census_from(const ginv_census_options* o) {
  ginv::app::CensusSettings c;
  if (!o) return c;
  if (o->k < 1 || o->k > ginv::kMaxPatternSize) throw ginv::ConfigError("--k: must be in [1, 8]");
  c.k = o->k;
  c.le_k = o->le_k != 0;
  if (o->norm) c.norm = ginv::parse_norm(o->norm);
  if (o->mode) c.mode = ginv::parse_census_mode(o->mode);
  c.samples = o->samples;
  c.seed = o->seed;
  return c;
}

void require(const void* p, const char* what) {
  if (!p) throw ginv::ConfigError(std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* ginv_last_error(void) { return last_error.c_str(); }

const char* ginv_version(void) { return GINV_VERSION; }

// --- vocabularies -----------------------------------------------------------

ginv_status ginv_vocab_enumerate(int k, const uint8_t* alphabet, size_t alphabet_len, int up_to, ginv_vocab** out) {
  return guarded([&] {
    require(out, "out");
    if (alphabet_len > 0) require(alphabet, "alphabet");
    std::vector<ginv::AttrId> a(alphabet, alphabet + alphabet_len);
    if (a.empty()) a.push_back(0);
    auto v = std::make_unique<ginv_vocab>();
    v->vocab = up_to ? ginv::enumerate_vocabulary_up_to(k, a) : ginv::enumerate_vocabulary(k, a);
    *out = v.release();
  });
}

size_t ginv_vocab_size(const ginv_vocab* v) { return v ? v->vocab.size() : 0; }

ginv_status ginv_vocab_pattern(const ginv_vocab* v, size_t index, int* k, uint32_t* topo_bits, uint8_t* attrs,
                               uint32_t* aut_count) {
  return guarded([&] {
    require(v, "vocab");
    if (index >= v->vocab.size()) throw ginv::ConfigError("pattern index out of range");
    const auto& p = v->vocab[index];
    if (k) *k = p.k;
    if (topo_bits) *topo_bits = p.topo_bits;
    if (attrs)
      for (int i = 0; i < ginv::kMaxPatternSize; ++i) attrs[i] = p.attrs[i];
    if (aut_count) *aut_count = p.aut_count;
  });
}

void ginv_vocab_free(ginv_vocab* v) { delete v; }

// --- graphs -----------------------------------------------------------------

ginv_status ginv_graphs_read(const char* path, ginv_graphs** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto g = std::make_unique<ginv_graphs>();
    g->graphs = ginv::read_graphs(std::filesystem::path(path));
    *out = g.release();
  });
}

size_t ginv_graphs_count(const ginv_graphs* g) { return g ? g->graphs.size() : 0; }

ginv_status ginv_graphs_info(const ginv_graphs* g, size_t index, uint32_t* n, size_t* num_edges, int* label) {
  return guarded([&] {
    require(g, "graphs");
    if (index >= g->graphs.size()) throw ginv::ConfigError("graph index out of range");
    const auto& gr = g->graphs[index];
    if (n) *n = gr.n();
    if (num_edges) *num_edges = gr.num_edges();
    if (label) *label = gr.label() ? *gr.label() : -1;
  });
}

void ginv_graphs_free(ginv_graphs* g) { delete g; }

// --- censuses ---------------------------------------------------------------

ginv_status ginv_census_compute(const ginv_graphs* g, int k, const char* norm, const char* mode, uint64_t samples,
                                uint64_t seed, int threads, const char* cache_file, ginv_census** out) {
  return guarded([&] {
    require(g, "graphs");
    require(out, "out");
    ginv::CensusRequest req;
    req.k = k;
    req.norm = norm ? ginv::parse_norm(norm) : ginv::Norm::kOmega;
    req.mode = mode ? ginv::parse_census_mode(mode) : ginv::CensusMode::kExact;
    req.samples = samples;
    req.seed = seed;
    std::optional<std::filesystem::path> cache;
    if (cache_file) cache = std::filesystem::path(cache_file);
    auto c = std::make_unique<ginv_census>();
    c->densities = ginv::census_dataset(g->graphs, req, cache, threads < 1 ? 1 : threads);
    *out = c.release();
  });
}

size_t ginv_census_graphs(const ginv_census* c) { return c ? c->densities.size() : 0; }

size_t ginv_census_entries(const ginv_census* c, size_t graph) {
  return c && graph < c->densities.size() ? c->densities[graph].entries.size() : 0;
}

ginv_status ginv_census_entry(const ginv_census* c, size_t graph, size_t entry, uint32_t* topo_bits,
                              uint8_t* attrs, uint64_t* count, double* density) {
  return guarded([&] {
    require(c, "census");
    if (graph >= c->densities.size() || entry >= c->densities[graph].entries.size()) {
      throw ginv::ConfigError("census index out of range");
    }
    const auto& e = c->densities[graph].entries[entry];
    if (topo_bits) *topo_bits = e.code.topo_bits;
    if (attrs)
      for (int i = 0; i < ginv::kMaxPatternSize; ++i) attrs[i] = e.code.attrs[i];
    if (count) *count = e.count;
    if (density) *density = e.density;
  });
}

void ginv_census_free(ginv_census* c) { delete c; }

// --- commands ---------------------------------------------------------------

void ginv_common_options_init(ginv_common_options* o) {
  if (!o) return;
  *o = ginv_common_options{};
  o->threads = 1;
}

void ginv_census_options_init(ginv_census_options* o) {
  if (!o) return;
  *o = ginv_census_options{};
  o->k = 5;
  o->samples = 100000;
}

void ginv_bound_check_options_init(ginv_bound_check_options* o) {
  if (!o) return;
  *o = ginv_bound_check_options{};
  o->er_p = -1.0;
}

ginv_status ginv_cmd_gen(const ginv_common_options* common, const char* task, ginv_sink sink, void* user) {
  return guarded([&] {
    ginv::app::GenCommand cmd;
    cmd.common = common_from(common);
    if (task) cmd.task = task;
    ginv::app::cmd_gen(cmd, make_io(sink, user));
  });
}

ginv_status ginv_cmd_vocab(int k, const uint8_t* alphabet, size_t alphabet_len, int le_k, int header,
                           ginv_sink sink, void* user) {
  return guarded([&] {
    ginv::app::VocabCommand cmd;
    cmd.k = k;
    if (alphabet_len > 0) {
      require(alphabet, "alphabet");
      cmd.alphabet.assign(alphabet, alphabet + alphabet_len);
    }
    cmd.le_k = le_k != 0;
    cmd.header = header != 0;
    ginv::app::cmd_vocab(cmd, make_io(sink, user));
  });
}

ginv_status ginv_cmd_census(const ginv_common_options* common, const char* data_dir, const char* cache_dir,
                            const ginv_census_options* census, ginv_sink sink, void* user) {
  return guarded([&] {
    ginv::app::CensusCommand cmd;
    cmd.common = common_from(common);
    cmd.data = str(data_dir);
    cmd.cache_dir = str(cache_dir);
    cmd.census = census_from(census);
    ginv::app::cmd_census(cmd, make_io(sink, user));
  });
}

ginv_status ginv_cmd_train(const ginv_common_options* common, const char* data_dir, const char* cache_dir,
                           const char* repr, const ginv_census_options* census, int census_inline, ginv_sink sink,
                           void* user) {
  return guarded([&] {
    ginv::app::TrainCommand cmd;
    cmd.common = common_from(common);
    cmd.data = str(data_dir);
    cmd.cache_dir = str(cache_dir);
    if (repr) cmd.repr = ginv::parse_repr_kind(repr);
    cmd.census = census_from(census);
    cmd.census_inline = census_inline != 0;
    ginv::app::cmd_train(cmd, make_io(sink, user));
  });
}

ginv_status ginv_cmd_eval(const ginv_common_options* common, const char* data_dir, const char* cache_dir,
                          const char* model_dir, int k, const char* norm, int census_inline, ginv_sink sink,
                          void* user) {
  return guarded([&] {
    ginv::app::EvalCommand cmd;
    cmd.common = common_from(common);
    cmd.data = str(data_dir);
    cmd.cache_dir = str(cache_dir);
    cmd.model = str(model_dir);
    if (k > 0) cmd.k = k;
    if (norm) cmd.norm = ginv::parse_norm(norm);
    cmd.census_inline = census_inline != 0;
    ginv::app::cmd_eval(cmd, make_io(sink, user));
  });
}

ginv_status ginv_cmd_bound_check(const ginv_common_options* common, const ginv_bound_check_options* opts,
                                 ginv_sink sink, void* user) {
  return guarded([&] {
    ginv::app::BoundCheckCommand cmd;
    cmd.common = common_from(common);
    if (opts) {
      if (opts->er_p >= 0.0) {
        if (opts->er_p > 1.0) throw ginv::ConfigError("--p: must be in [0, 1]");
        cmd.graphon = ginv::Graphon(ginv::ErGraphon{opts->er_p});
      }
      if (opts->num_sizes > 0) {
        require(opts->sizes, "sizes");
        cmd.sizes.assign(opts->sizes, opts->sizes + opts->num_sizes);
      }
      if (opts->k > 0) cmd.k = opts->k;
      if (opts->num_epsilons > 0) {
        require(opts->epsilons, "epsilons");
        cmd.epsilons.assign(opts->epsilons, opts->epsilons + opts->num_epsilons);
      }
      if (opts->trials > 0) cmd.trials = opts->trials;
      cmd.cross_sizes = opts->cross_sizes != 0;
    }
    ginv::app::cmd_bound_check(cmd, make_io(sink, user));
  });
}

ginv_status ginv_cmd_pipeline(const ginv_common_options* common, ginv_sink sink, void* user) {
  return guarded([&] {
    ginv::app::PipelineCommand cmd;
    cmd.common = common_from(common);
    ginv::app::cmd_pipeline(cmd, make_io(sink, user));
  });
}

}  // extern "C"
