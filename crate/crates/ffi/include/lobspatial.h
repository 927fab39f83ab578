#ifndef LOBSPATIAL_H
#define LOBSPATIAL_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Model families, matching the bundle's `family` field.
 */
typedef enum LobsFamily {
  LOBS_FAMILY_NAIVE = 0,
  LOBS_FAMILY_LOGISTIC = 1,
  LOBS_FAMILY_STANDARD = 2,
  LOBS_FAMILY_SPATIAL = 3,
} LobsFamily;

/**
 * Status codes returned by every fallible call.
 */
typedef enum LobsStatus {
  LOBS_STATUS_OK = 0,
  LOBS_STATUS_NULL_POINTER = 1,
  LOBS_STATUS_INVALID_ARGUMENT = 2,
  LOBS_STATUS_IO = 3,
  LOBS_STATUS_PARSE = 4,
  LOBS_STATUS_NUMERIC = 5,
  LOBS_STATUS_BUFFER_TOO_SMALL = 6,
  LOBS_STATUS_PANIC = 7,
} LobsStatus;

/**
 * A loaded model bundle.
 */
typedef struct LobsModel LobsModel;

/**
 * An order-book state.
 */
typedef struct LobsState LobsState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t lobs_last_error(char *buf, size_t len);

/**
 * Number of price levels per side expected by [`lobs_state_new`].
 */
size_t lobs_levels(void);

/**
 * Load a JSON model bundle from `path`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LobsStatus lobs_model_load(const char *path, struct LobsModel **out);

/**
 * Release a model. Null is ignored.
 *
 * # Safety
 * `model` must come from [`lobs_model_load`] and not be used afterwards.
 */
void lobs_model_free(struct LobsModel *model);

/**
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum LobsStatus lobs_model_family(const struct LobsModel *model, enum LobsFamily *out);

/**
 * Number of values per component on the model's truncated grid.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum LobsStatus lobs_model_grid_size(const struct LobsModel *model, size_t *out);

/**
 * Build a state from prices in ticks and `lobs_levels()` sizes per side.
 *
 * # Safety
 * `ask_sizes` and `bid_sizes` must be valid for `levels` values; `out` must
 * be a valid pointer.
 */
enum LobsStatus lobs_state_new(int64_t timestamp_ns,
                               int64_t best_ask_price,
                               int64_t best_bid_price,
                               const uint64_t *ask_sizes,
                               const uint64_t *bid_sizes,
                               size_t levels,
                               struct LobsState **out);

/**
 * Release a state. Null is ignored.
 *
 * # Safety
 * `state` must come from [`lobs_state_new`] and not be used afterwards.
 */
void lobs_state_free(struct LobsState *state);

/**
 * Joint log-likelihood of the move `(y1, y2)`; `-inf` for impossible moves.
 *
 * # Safety
 * All pointers must be valid.
 */
enum LobsStatus lobs_log_prob(const struct LobsModel *model,
                              const struct LobsState *state,
                              int64_t y1,
                              int64_t y2,
                              double *out);

/**
 * Materialized joint distribution over the grid, `y1`-major: entry
 * `i * size + j` is `P[y1 = i - half, y2 = j - half]`. `residual` receives the
 * mass outside the grid. `len` must be at least `size * size`.
 *
 * # Safety
 * `probs` must be valid for `len` values; the other pointers must be valid.
 */
enum LobsStatus lobs_joint_pmf(const struct LobsModel *model,
                               const struct LobsState *state,
                               double *probs,
                               size_t len,
                               double *residual);

/**
 * The `k` most probable moves in decreasing probability.
 *
 * # Safety
 * `y1`, `y2` and `probs` must be valid for `k` values; the other pointers
 * must be valid.
 */
enum LobsStatus lobs_topk(const struct LobsModel *model,
                          const struct LobsState *state,
                          size_t k,
                          int64_t *y1,
                          int64_t *y2,
                          double *probs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOBSPATIAL_H */
