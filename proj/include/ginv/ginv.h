#ifndef GINV_GINV_H
#define GINV_GINV_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GINV_API __declspec(dllexport)
#else
#define GINV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The nonzero values double as process exit codes. */
typedef enum ginv_status {
  GINV_OK = 0,
  GINV_E_USAGE = 1,     /* bad arguments or configuration */
  GINV_E_DATA = 2,      /* unreadable, missing or inconsistent data */
  GINV_E_INVARIANT = 3, /* internal consistency check failed */
  GINV_E_INTERNAL = 4   /* unexpected failure (out of memory, I/O) */
} ginv_status;

/* Message of the last failed call on this thread; "" after a success. */
GINV_API const char* ginv_last_error(void);
GINV_API const char* ginv_version(void);

/* Receives command output. channel 1 is the report, channel 2 progress. */
typedef void (*ginv_sink)(int channel, const char* text, size_t len, void* user);

/* ------------------------------------------------------------------------ */
/* Pattern vocabularies */

typedef struct ginv_vocab ginv_vocab;

/* Connected patterns on exactly k vertices (or 1..k when up_to is nonzero)
 * with attributes drawn from `alphabet`. An empty alphabet means the single
 * attribute 0 (unattributed patterns). */
GINV_API ginv_status ginv_vocab_enumerate(int k, const uint8_t* alphabet, size_t alphabet_len, int up_to,
                                          ginv_vocab** out);
GINV_API size_t ginv_vocab_size(const ginv_vocab* v);
/* attrs must hold 8 entries; entries past k are zero. */
GINV_API ginv_status ginv_vocab_pattern(const ginv_vocab* v, size_t index, int* k, uint32_t* topo_bits,
                                        uint8_t* attrs, uint32_t* aut_count);
GINV_API void ginv_vocab_free(ginv_vocab* v);

/* ------------------------------------------------------------------------ */
/* Graph files */

typedef struct ginv_graphs ginv_graphs;

GINV_API ginv_status ginv_graphs_read(const char* path, ginv_graphs** out);
GINV_API size_t ginv_graphs_count(const ginv_graphs* g);
/* label is -1 for unlabeled graphs. */
GINV_API ginv_status ginv_graphs_info(const ginv_graphs* g, size_t index, uint32_t* n, size_t* num_edges,
                                      int* label);
GINV_API void ginv_graphs_free(ginv_graphs* g);

/* ------------------------------------------------------------------------ */
/* Censuses */

typedef struct ginv_census ginv_census;

/* norm: "tind" or "omega"; mode: "exact" or "sampled". cache_file may be
 * NULL. */
GINV_API ginv_status ginv_census_compute(const ginv_graphs* g, int k, const char* norm, const char* mode,
                                         uint64_t samples, uint64_t seed, int threads, const char* cache_file,
                                         ginv_census** out);
GINV_API size_t ginv_census_graphs(const ginv_census* c);
GINV_API size_t ginv_census_entries(const ginv_census* c, size_t graph);
GINV_API ginv_status ginv_census_entry(const ginv_census* c, size_t graph, size_t entry, uint32_t* topo_bits,
                                       uint8_t* attrs, uint64_t* count, double* density);
GINV_API void ginv_census_free(ginv_census* c);

/* ------------------------------------------------------------------------ */
/* Commands. Option structs must be initialized with their _init function;
 * string fields may be NULL for "unset". */

typedef struct ginv_common_options {
  const char* config;
  const char* out;
  uint64_t seed;
  int seed_set;
  int threads;
} ginv_common_options;

typedef struct ginv_census_options {
  int k;
  int le_k;
  const char* norm;
  const char* mode;
  uint64_t samples;
  uint64_t seed; /* sampled mode only; census overrides it with common->seed */
} ginv_census_options;

GINV_API void ginv_common_options_init(ginv_common_options* o);
GINV_API void ginv_census_options_init(ginv_census_options* o);

/* task: built-in task ("er" or "sbm") used when common->config is NULL. */
GINV_API ginv_status ginv_cmd_gen(const ginv_common_options* common, const char* task, ginv_sink sink,
                                  void* user);

GINV_API ginv_status ginv_cmd_vocab(int k, const uint8_t* alphabet, size_t alphabet_len, int le_k, int header,
                                    ginv_sink sink, void* user);

GINV_API ginv_status ginv_cmd_census(const ginv_common_options* common, const char* data_dir,
                                     const char* cache_dir, const ginv_census_options* census, ginv_sink sink,
                                     void* user);

/* repr: "one_hot", "gin", "gin_plus" or "gin_baseline". */
GINV_API ginv_status ginv_cmd_train(const ginv_common_options* common, const char* data_dir,
                                    const char* cache_dir, const char* repr, const ginv_census_options* census,
                                    int census_inline, ginv_sink sink, void* user);

/* k <= 0 and norm == NULL mean "take from the checkpoint". */
GINV_API ginv_status ginv_cmd_eval(const ginv_common_options* common, const char* data_dir, const char* cache_dir,
                                   const char* model_dir, int k, const char* norm, int census_inline,
                                   ginv_sink sink, void* user);

typedef struct ginv_bound_check_options {
  double er_p; /* ER graphon edge probability; < 0 keeps the config value */
  const uint32_t* sizes;
  size_t num_sizes;
  int k; /* <= 0 keeps the config value */
  const double* epsilons;
  size_t num_epsilons;
  int trials; /* <= 0 keeps the config value */
  int cross_sizes;
} ginv_bound_check_options;

GINV_API void ginv_bound_check_options_init(ginv_bound_check_options* o);
GINV_API ginv_status ginv_cmd_bound_check(const ginv_common_options* common, const ginv_bound_check_options* opts,
                                          ginv_sink sink, void* user);

GINV_API ginv_status ginv_cmd_pipeline(const ginv_common_options* common, ginv_sink sink, void* user);

#ifdef __cplusplus
}
#endif

#endif
