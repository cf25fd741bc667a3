#ifndef TEXTNET_H
#define TEXTNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TnStatus {
  TN_STATUS_OK = 0,
  TN_STATUS_CONFIG_ERROR = 1,
  TN_STATUS_DATA_ERROR = 2,
  TN_STATUS_NUMERICAL_ERROR = 3,
  TN_STATUS_NULL_POINTER = 4,
  TN_STATUS_INVALID_ARGUMENT = 5,
  TN_STATUS_PANIC = 6,
} TnStatus;

/**
 * Metric selector, passed as `uint32_t`.
 */
typedef enum TnMetric {
  TN_METRIC_DEGREE = 0,
  TN_METRIC_AVG_SHORTEST_PATH = 1,
  TN_METRIC_BETWEENNESS = 2,
  TN_METRIC_INTERMITTENCY = 3,
} TnMetric;

/**
 * Command selector for [`tn_run_config`], passed as `uint32_t`.
 */
typedef enum TnRunMode {
  /**
   * Network method with and without MDS.
   */
  TN_RUN_MODE_ATTRIBUTION = 0,
  TN_RUN_MODE_WITHOUT_MDS = 1,
  TN_RUN_MODE_BASELINE = 2,
  TN_RUN_MODE_EXPORT_PLOTS = 3,
} TnRunMode;

/**
 * A preprocessed document with its metric table.
 */
typedef struct TnDocument TnDocument;

/**
 * Top-ranked words of one document under one metric.
 */
typedef struct TnProfile TnProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *tn_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tn_version(void);

/**
 * Tokenizes `text`, removes the default English stopwords, builds the
 * co-occurrence network and computes every word's metrics.
 *
 * # Safety
 * `id` and `text` must be NUL-terminated strings; `out` must be writable.
 */
enum TnStatus tn_document_from_text(const char *id, const char *text, struct TnDocument **out);

/**
 * # Safety
 * `doc` must come from [`tn_document_from_text`] and not be freed twice.
 */
void tn_document_free(struct TnDocument *doc);

/**
 * Number of distinct words (network nodes).
 *
 * # Safety
 * `doc` must be a live handle; `out` must be writable.
 */
enum TnStatus tn_document_node_count(const struct TnDocument *doc, size_t *out);

/**
 * Value of `metric` for `lemma`. `*defined` is set to 0 when the value is
 * undefined (unreachable average path, or a word seen once for
 * intermittency), in which case `*out` is NaN.
 *
 * # Safety
 * `doc` must be a live handle, `lemma` a NUL-terminated string, `out` and
 * `defined` writable.
 */
enum TnStatus tn_document_metric(const struct TnDocument *doc,
                                 const char *lemma,
                                 uint32_t metric,
                                 double *out,
                                 int32_t *defined);

/**
 * Top-`n` rank profile of a document under `metric`, default direction.
 *
 * # Safety
 * `doc` must be a live handle; `out` must be writable.
 */
enum TnStatus tn_profile_new(const struct TnDocument *doc,
                             uint32_t metric,
                             size_t n,
                             struct TnProfile **out);

/**
 * # Safety
 * `profile` must come from [`tn_profile_new`] and not be freed twice.
 */
void tn_profile_free(struct TnProfile *profile);

/**
 * Sum over shared words of the product of their ranks.
 *
 * # Safety
 * Both profiles must be live handles; `out` must be writable.
 */
enum TnStatus tn_profile_similarity(const struct TnProfile *a,
                                    const struct TnProfile *b,
                                    uint64_t *out);

/**
 * `1 - similarity / (n(n+1)(2n+1)/6)`.
 *
 * # Safety
 * Both profiles must be live handles; `out` must be writable.
 */
enum TnStatus tn_profile_distance(const struct TnProfile *a,
                                  const struct TnProfile *b,
                                  double *out);

/**
 * Fills `out` (row-major, `count * count` doubles) with pairwise profile
 * distances; the diagonal is 0.
 *
 * # Safety
 * `profiles` must point to `count` live handles and `out` to
 * `count * count` writable doubles.
 */
enum TnStatus tn_distance_matrix(const struct TnProfile *const *profiles,
                                 size_t count,
                                 double *out);

/**
 * Runs a pipeline command with the config file at `config_path`.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string.
 */
enum TnStatus tn_run_config(const char *config_path, uint32_t mode);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEXTNET_H */
