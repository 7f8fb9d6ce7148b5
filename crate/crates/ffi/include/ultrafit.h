#ifndef ULTRAFIT_H
#define ULTRAFIT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum UltrafitStatus {
  ULTRAFIT_STATUS_OK = 0,
  ULTRAFIT_STATUS_NULL_POINTER = 1,
  ULTRAFIT_STATUS_INVALID_ARGUMENT = 2,
  ULTRAFIT_STATUS_EMPTY_INPUT = 3,
  ULTRAFIT_STATUS_OUT_OF_RANGE = 4,
  ULTRAFIT_STATUS_INVALID_DENDROGRAM = 5,
  ULTRAFIT_STATUS_SIZE_MISMATCH = 6,
  ULTRAFIT_STATUS_BUFFER_TOO_SMALL = 7,
  ULTRAFIT_STATUS_PANIC = 8,
} UltrafitStatus;

typedef enum UltrafitAlgorithm {
  ULTRAFIT_ALGORITHM_APPROX = 0,
  ULTRAFIT_ALGORITHM_ACC = 1,
  ULTRAFIT_ALGORITHM_EXACT = 2,
  ULTRAFIT_ALGORITHM_SINGLE = 3,
  ULTRAFIT_ALGORITHM_COMPLETE = 4,
  ULTRAFIT_ALGORITHM_AVERAGE = 5,
  ULTRAFIT_ALGORITHM_WARD = 6,
} UltrafitAlgorithm;

/**
 * Dendrogram handle; leaves are the rows of the point set it was fitted on.
 */
typedef struct UltrafitDendrogram UltrafitDendrogram;

/**
 * Point set handle.
 */
typedef struct UltrafitPoints UltrafitPoints;

/**
 * Spanner parameters; `reps` and `projections` of 0 select the defaults.
 */
typedef struct UltrafitSpannerConfig {
  double gamma;
  uint64_t seed;
  size_t reps;
  size_t projections;
} UltrafitSpannerConfig;

typedef struct UltrafitDistortion {
  double max;
  double min;
  double mean;
  /**
   * Pair attaining `max`; both equal when there are fewer than two leaves.
   */
  size_t argmax_u;
  size_t argmax_v;
  uint64_t pairs;
  double scale;
} UltrafitDistortion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ultrafit_last_error(void);

struct UltrafitSpannerConfig ultrafit_spanner_config_default(void);

/**
 * Copies `n * d` row-major coordinates into a new point set.
 *
 * # Safety
 * `coords` must point to `n * d` readable doubles; `out` must be writable.
 */
enum UltrafitStatus ultrafit_points_new(const double *coords,
                                        size_t n,
                                        size_t d,
                                        struct UltrafitPoints **out);

/**
 * # Safety
 * `points` must be null or a handle from [`ultrafit_points_new`] not yet freed.
 */
void ultrafit_points_free(struct UltrafitPoints *points);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `points` must be null or a live handle.
 */
size_t ultrafit_points_len(const struct UltrafitPoints *points);

/**
 * Fits `algorithm`. Duplicate points are allowed: copies are joined at
 * height zero, so the result always has one leaf per input row.
 *
 * # Safety
 * `points` and `config` must be live/readable; `out` must be writable.
 */
enum UltrafitStatus ultrafit_fit(const struct UltrafitPoints *points,
                                 enum UltrafitAlgorithm algorithm,
                                 const struct UltrafitSpannerConfig *config,
                                 struct UltrafitDendrogram **out);

/**
 * # Safety
 * `dendrogram` must be null or a live handle.
 */
void ultrafit_dendrogram_free(struct UltrafitDendrogram *dendrogram);

/**
 * Leaf count, or 0 for a null handle.
 *
 * # Safety
 * `dendrogram` must be null or a live handle.
 */
size_t ultrafit_dendrogram_n_leaves(const struct UltrafitDendrogram *dendrogram);

/**
 * Ultrametric distance between leaves `u` and `v`.
 *
 * # Safety
 * `dendrogram` must be a live handle; `out` must be writable.
 */
enum UltrafitStatus ultrafit_dendrogram_distance(const struct UltrafitDendrogram *dendrogram,
                                                 size_t u,
                                                 size_t v,
                                                 double *out);

/**
 * Copies the `n - 1` merges into caller arrays of at least `capacity`
 * entries. Internal node ids follow the leaves: merge `i` creates `n + i`.
 *
 * # Safety
 * Each non-null array must hold `capacity` writable elements.
 */
enum UltrafitStatus ultrafit_dendrogram_merges(const struct UltrafitDendrogram *dendrogram,
                                               size_t *left,
                                               size_t *right,
                                               double *height,
                                               size_t *size,
                                               size_t capacity);

/**
 * Newick text with leaves labelled by index. Free with [`ultrafit_string_free`].
 *
 * # Safety
 * `dendrogram` must be a live handle; `out` must be writable.
 */
enum UltrafitStatus ultrafit_dendrogram_to_newick(const struct UltrafitDendrogram *dendrogram,
                                                  char **out);

/**
 * Rows of `left right height size`. Free with [`ultrafit_string_free`].
 *
 * # Safety
 * `dendrogram` must be a live handle; `out` must be writable.
 */
enum UltrafitStatus ultrafit_dendrogram_to_merge_list(const struct UltrafitDendrogram *dendrogram,
                                                      char **out);

/**
 * Parses a merge list as written by [`ultrafit_dendrogram_to_merge_list`].
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum UltrafitStatus ultrafit_dendrogram_from_merge_list(const char *text,
                                                        struct UltrafitDendrogram **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void ultrafit_string_free(char *s);

/**
 * Exact distortion of `dendrogram` over all point pairs, optionally after
 * rescaling so that the smallest ratio is 1.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum UltrafitStatus ultrafit_distortion(const struct UltrafitPoints *points,
                                        const struct UltrafitDendrogram *dendrogram,
                                        bool normalize,
                                        struct UltrafitDistortion *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ULTRAFIT_H */
