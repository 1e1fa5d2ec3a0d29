#ifndef EPA_H
#define EPA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EpaChannel {
  EPA_CHANNEL_SEMANTIC_AGNOSTIC = 0,
  EPA_CHANNEL_SEMANTIC_PRESERVING = 1,
} EpaChannel;

typedef enum EpaStatus {
  EPA_STATUS_OK = 0,
  EPA_STATUS_NULL_POINTER = 1,
  EPA_STATUS_INVALID_ARGUMENT = 2,
  EPA_STATUS_INVALID_GRAPH = 3,
  EPA_STATUS_IO = 4,
  EPA_STATUS_PARSE = 5,
  EPA_STATUS_COMPUTE = 6,
  EPA_STATUS_PANIC = 7,
} EpaStatus;

typedef enum EpaVariant {
  EPA_VARIANT_MODIFIED = 0,
  EPA_VARIANT_ORIGINAL = 1,
} EpaVariant;

// A list of labelled graphs with explanation masks.
typedef struct EpaDataset EpaDataset;

// An undirected graph.
typedef struct EpaGraph EpaGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failed call on this thread, or null. The
// pointer stays valid until the next call into this library.
const char *epa_last_error_message(void);

// Builds a graph from `num_edges` pairs stored flat in `edges`
// (`u0, v0, u1, v1, ...`).
//
// # Safety
// `edges` must point to `2 * num_edges` values; `out` must be writable.
enum EpaStatus epa_graph_new(size_t num_nodes,
                             const size_t *edges,
                             size_t num_edges,
                             struct EpaGraph **out);

// # Safety
// `g` must come from this library and not be used afterwards. Null is ignored.
void epa_graph_free(struct EpaGraph *g);

// # Safety
// `g` must be a live graph handle; `nodes` and `edges` must be writable.
enum EpaStatus epa_graph_size(const struct EpaGraph *g, size_t *nodes, size_t *edges);

// Number of simple cycles.
//
// # Safety
// `g` must be a live graph handle; `out` must be writable.
enum EpaStatus epa_graph_count_cycles(const struct EpaGraph *g, uint64_t *out);

// Absolute difference of the two graphs' simple-cycle counts.
//
// # Safety
// `a` and `b` must be live graph handles; `out` must be writable.
enum EpaStatus epa_cycle_distance(const struct EpaGraph *a,
                                  const struct EpaGraph *b,
                                  uint64_t *out);

// Generates a BA-2motifs dataset.
//
// # Safety
// `out` must be writable.
enum EpaStatus epa_dataset_generate(size_t n_graphs,
                                    double q,
                                    size_t base_nodes,
                                    uint64_t seed,
                                    enum EpaVariant variant,
                                    struct EpaDataset **out);

// Reads a JSON-lines dataset.
//
// # Safety
// `path` must be a nul-terminated string; `out` must be writable.
enum EpaStatus epa_dataset_read(const char *path, struct EpaDataset **out);

// Writes a dataset as JSON lines.
//
// # Safety
// `ds` must be a live dataset handle; `path` a nul-terminated string.
enum EpaStatus epa_dataset_write(const struct EpaDataset *ds, const char *path);

// # Safety
// `ds` must come from this library and not be used afterwards. Null is ignored.
void epa_dataset_free(struct EpaDataset *ds);

// # Safety
// `ds` must be a live dataset handle; `out` must be writable.
enum EpaStatus epa_dataset_len(const struct EpaDataset *ds, size_t *out);

// Copies graph `index` into a new handle and stores its label.
//
// # Safety
// `ds` must be a live dataset handle; `graph` and `label` must be writable.
enum EpaStatus epa_dataset_get(const struct EpaDataset *ds,
                               size_t index,
                               struct EpaGraph **graph,
                               uint32_t *label);

// Closed-form pair table, row-major over cycle classes (0, 1, 3).
//
// # Safety
// `out` must point to 9 writable doubles.
enum EpaStatus epa_expected_omega(double p, double q, enum EpaChannel ch, double *out);

// Enumerated pair table, same layout as [`epa_expected_omega`].
//
// # Safety
// `out` must point to 9 writable doubles.
enum EpaStatus epa_brute_force_omega(double p, double q, enum EpaChannel ch, double *out);

// Mean NT-Xent loss over `n` view pairs stored row-major (`n x dim`).
//
// # Safety
// `z1` and `z2` must each point to `n * dim` doubles; `out` must be writable.
enum EpaStatus epa_nt_xent(const double *z1,
                           const double *z2,
                           size_t n,
                           size_t dim,
                           double temperature,
                           double *out);

// SimSiam loss of one quadruple of `dim`-vectors.
//
// # Safety
// Each input must point to `dim` doubles; `out` must be writable.
enum EpaStatus epa_simsiam(const double *p1,
                           const double *p2,
                           const double *z1,
                           const double *z2,
                           size_t dim,
                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPA_H */
