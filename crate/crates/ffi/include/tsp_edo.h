/* Generated by cbindgen; do not edit. */

#ifndef TSP_EDO_H
#define TSP_EDO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EdoMeasure {
  EDO_MEASURE_ENTROPY = 0,
  EDO_MEASURE_ED = 1,
  EDO_MEASURE_PD = 2,
} EdoMeasure;

typedef enum EdoMutation {
  EDO_MUTATION_CLASSIC = 0,
  EDO_MUTATION_BIASED = 1,
  EDO_MUTATION_DUAL = 2,
} EdoMutation;

typedef enum EdoSelection {
  // Parent-pool for entropy, full-population for ED and PD.
  EDO_SELECTION_DEFAULT = 0,
  EDO_SELECTION_PARENT_POOL = 1,
  EDO_SELECTION_FULL_POPULATION = 2,
} EdoSelection;

typedef enum EdoCutBias {
  EDO_CUT_BIAS_FIRST = 0,
  EDO_CUT_BIAS_BOTH = 1,
} EdoCutBias;

typedef enum EdoStatus {
  EDO_STATUS_OK = 0,
  EDO_STATUS_NULL_POINTER = 1,
  EDO_STATUS_INVALID_ARGUMENT = 2,
  EDO_STATUS_PARSE = 3,
  EDO_STATUS_VALIDATION = 4,
  EDO_STATUS_CONFIG = 5,
  EDO_STATUS_CONSISTENCY = 6,
  EDO_STATUS_SIZE = 7,
  EDO_STATUS_IO = 8,
  EDO_STATUS_UNSUPPORTED = 9,
  EDO_STATUS_OUT_OF_RANGE = 10,
  EDO_STATUS_PANIC = 11,
} EdoStatus;

// Opaque instance handle, optionally carrying a known optimum.
typedef struct EdoInstance EdoInstance;

// Opaque handle to a finished run.
typedef struct EdoRun EdoRun;

// Run parameters. Use `alpha = INFINITY` for unconstrained runs.
typedef struct EdoConfig {
  size_t mu;
  size_t k;
  double alpha;
  uint64_t budget;
  uint64_t seed;
  uint64_t trace_every;
  enum EdoMeasure measure;
  enum EdoMutation mutation;
  enum EdoSelection selection;
  enum EdoCutBias cut_bias;
} EdoConfig;

typedef struct EdoRunSummary {
  uint64_t evals_used;
  uint64_t steps;
  // -1 when `H_max` was not reached.
  int64_t evals_to_hmax;
  double final_h;
  double final_normalised;
  // Value of the configured measure on the final population.
  double final_score;
  double h_min;
  double h_max;
  uint64_t feasible_offspring;
} EdoRunSummary;

typedef struct EdoTracePoint {
  uint64_t eval;
  double h;
  double h_normalised;
  uint32_t f_min;
  uint32_t f_max;
  uint32_t c;
  uint64_t feasible;
} EdoTracePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *edo_last_error(void);

// Library version as a static NUL-terminated string.
const char *edo_version(void);

// Defaults matching the library: unconstrained, dual offspring, budget
// 100000, seed 0, trace every 100 evaluations.
struct EdoConfig edo_config_default(size_t mu, size_t k);

// Closed-form entropy bounds for `n` nodes, `mu` tours and segment length `k`.
//
// # Safety
// `h_min` and `h_max` must be valid for writes.
enum EdoStatus edo_bounds(size_t n, size_t mu, size_t k, double *h_min, double *h_max);

// Complete graph with unit weights; the identity tour is recorded as optimal.
//
// # Safety
// `out` must be valid for writes.
enum EdoStatus edo_instance_unit(size_t n, struct EdoInstance **out);

// Parses a TSPLIB instance from NUL-terminated text.
//
// # Safety
// `text` must be a valid C string and `out` valid for writes.
enum EdoStatus edo_instance_from_tsplib(const char *text, struct EdoInstance **out);

// Attaches an optimum from TSPLIB `.tour` text (or a bare cost).
//
// # Safety
// `inst` must come from this library and `text` be a valid C string.
enum EdoStatus edo_instance_set_optimum(struct EdoInstance *inst, const char *text);

// Node count, or 0 for NULL.
//
// # Safety
// `inst` must be NULL or come from this library.
size_t edo_instance_n(const struct EdoInstance *inst);

// # Safety
// `inst` must be NULL or come from this library, and not be used afterwards.
void edo_instance_free(struct EdoInstance *inst);

// Runs the EA to completion.
//
// # Safety
// `inst` and `cfg` must be valid, `out` valid for writes.
enum EdoStatus edo_run(const struct EdoInstance *inst,
                       const struct EdoConfig *cfg,
                       struct EdoRun **out);

// # Safety
// `run` must come from [`edo_run`]; `out` must be valid for writes.
enum EdoStatus edo_run_summary(const struct EdoRun *run, struct EdoRunSummary *out);

// Number of trace points, or 0 for NULL.
//
// # Safety
// `run` must be NULL or come from [`edo_run`].
size_t edo_run_trace_len(const struct EdoRun *run);

// # Safety
// `run` must come from [`edo_run`]; `out` must be valid for writes.
enum EdoStatus edo_run_trace_point(const struct EdoRun *run, size_t idx, struct EdoTracePoint *out);

// Population size of the final population, or 0 for NULL.
//
// # Safety
// `run` must be NULL or come from [`edo_run`].
size_t edo_run_mu(const struct EdoRun *run);

// Copies tour `p` of the final population (0-based nodes) into `buf`, which
// must hold `len >= n` entries, and its cost into `cost` if not NULL.
//
// # Safety
// `buf` must be valid for `len` writes.
enum EdoStatus edo_run_tour(const struct EdoRun *run,
                            size_t p,
                            size_t *buf,
                            size_t len,
                            double *cost);

// # Safety
// `run` must be NULL or come from [`edo_run`], and not be used afterwards.
void edo_run_free(struct EdoRun *run);

// Entropy of `mu` tours over `n` nodes given row-major as `perms[mu * n]`.
//
// # Safety
// `perms` must be valid for `mu * n` reads and `h` for writes.
enum EdoStatus edo_population_entropy(const size_t *perms,
                                      size_t n,
                                      size_t mu,
                                      size_t k,
                                      double *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TSP_EDO_H */
