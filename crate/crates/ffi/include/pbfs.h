#ifndef PBFS_H
#define PBFS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PbfsStatus {
  PBFS_STATUS_OK = 0,
  PBFS_STATUS_NULL_POINTER = 1,
  PBFS_STATUS_INVALID_ARGUMENT = 2,
  PBFS_STATUS_IO = 3,
  PBFS_STATUS_FORMAT = 4,
  PBFS_STATUS_PARSE = 5,
  PBFS_STATUS_CAPACITY = 6,
  PBFS_STATUS_CONFIG = 7,
  PBFS_STATUS_MISMATCH = 8,
  PBFS_STATUS_UNDEFINED_METRIC = 9,
  PBFS_STATUS_BUFFER_TOO_SMALL = 10,
  PBFS_STATUS_PANIC = 11,
} PbfsStatus;

typedef enum PbfsGeneratorKind {
  PBFS_GENERATOR_KIND_UNIFORM_RANDOM = 0,
  PBFS_GENERATOR_KIND_KRONECKER = 1,
} PbfsGeneratorKind;

typedef enum PbfsCategory {
  PBFS_CATEGORY_SMALL_DIAMETER = 0,
  PBFS_CATEGORY_LARGE_DIAMETER = 1,
} PbfsCategory;

typedef enum PbfsVariant {
  PBFS_VARIANT_SERIAL = 0,
  PBFS_VARIANT_CONVENTIONAL = 1,
  PBFS_VARIANT_NON_ATOMIC = 2,
  PBFS_VARIANT_HYBRID = 3,
  PBFS_VARIANT_HYBRID_BEAMER = 4,
  PBFS_VARIANT_VISITED_BITMAP_INLINE = 5,
  PBFS_VARIANT_VISITED_BITMAP_DEFERRED = 6,
  PBFS_VARIANT_TOP_DOWN_PERIODIC_FLUSH = 7,
} PbfsVariant;

typedef enum PbfsPhase {
  PBFS_PHASE_TOP_DOWN = 0,
  PBFS_PHASE_BOTTOM_UP = 1,
} PbfsPhase;

/**
 * Opaque CSR graph handle.
 */
typedef struct PbfsGraph PbfsGraph;

/**
 * Opaque per-level trace of one traversal.
 */
typedef struct PbfsTrace PbfsTrace;

typedef struct PbfsGraphStats {
  uint64_t vertex_count;
  uint64_t edge_count;
  double average_degree;
  uint64_t max_degree;
  enum PbfsCategory category;
} PbfsGraphStats;

/**
 * Kernel configuration. Obtain defaults from [`pbfs_config_default`].
 */
typedef struct PbfsConfig {
  enum PbfsVariant variant;
  size_t worker_count;
  double hybrid_threshold_fraction;
  double alpha;
  double beta;
  size_t flush_capacity;
  bool force_top_down_only;
  bool check_races;
  bool pin_workers;
  /**
   * Route through the diameter classifier (large-diameter graphs run
   * top-down only).
   */
  bool dispatch;
  double classifier_threshold;
} PbfsConfig;

typedef struct PbfsLevelRecord {
  uint32_t depth;
  enum PbfsPhase phase;
  uint64_t frontier_size;
  uint64_t distinct_size;
  uint64_t duplicate_count;
  uint64_t edges_examined;
  uint64_t flush_events;
  uint64_t elapsed_ns;
} PbfsLevelRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *pbfs_last_error(void);

/**
 * Builds a graph from `edge_count` pairs `(sources[i], targets[i])`.
 */
enum PbfsStatus pbfs_graph_from_edges(const uint32_t *sources,
                                      const uint32_t *targets,
                                      size_t edge_count,
                                      size_t vertex_count,
                                      bool symmetrize,
                                      struct PbfsGraph **out);

enum PbfsStatus pbfs_graph_generate(enum PbfsGeneratorKind kind,
                                    uint32_t scale,
                                    uint32_t edge_factor,
                                    uint64_t seed,
                                    struct PbfsGraph **out);

/**
 * Loads an edge list or binary CSR file; the format is detected from the
 * file header.
 */
enum PbfsStatus pbfs_graph_load(const char *path,
                                bool one_based,
                                bool symmetrize,
                                struct PbfsGraph **out);

enum PbfsStatus pbfs_graph_save(const struct PbfsGraph *graph, const char *path);

/**
 * Returns 0 for a null handle.
 */
uint64_t pbfs_graph_vertex_count(const struct PbfsGraph *graph);

/**
 * Number of directed adjacency entries. Returns 0 for a null handle.
 */
uint64_t pbfs_graph_edge_count(const struct PbfsGraph *graph);

enum PbfsStatus pbfs_graph_stats(const struct PbfsGraph *graph,
                                 double classifier_threshold,
                                 struct PbfsGraphStats *out);

void pbfs_graph_free(struct PbfsGraph *graph);

struct PbfsConfig pbfs_config_default(enum PbfsVariant variant);

/**
 * Runs one traversal from `source`, writing `vertex_count` distances into
 * `distances` (`UINT32_MAX` marks unreachable vertices). `trace_out` may be
 * null; otherwise it receives a trace handle owned by the caller.
 */
enum PbfsStatus pbfs_run(const struct PbfsGraph *graph,
                         uint32_t source,
                         const struct PbfsConfig *config,
                         uint32_t *distances,
                         size_t distances_len,
                         struct PbfsTrace **trace_out);

/**
 * Returns 0 for a null handle.
 */
size_t pbfs_trace_level_count(const struct PbfsTrace *trace);

uint64_t pbfs_trace_total_ns(const struct PbfsTrace *trace);

enum PbfsStatus pbfs_trace_level(const struct PbfsTrace *trace,
                                 size_t index,
                                 struct PbfsLevelRecord *out);

enum PbfsStatus pbfs_trace_average_duplicate_percentage(const struct PbfsTrace *trace, double *out);

void pbfs_trace_free(struct PbfsTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PBFS_H */
