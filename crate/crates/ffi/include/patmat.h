/* C interface to the patmat limiting-moment library. */

#ifndef PATMAT_H
#define PATMAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum PatmatStatus {
  /**
   * The call succeeded.
   */
  PATMAT_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PATMAT_STATUS_NULL_POINTER = 1,
  /**
   * An argument failed validation: bad name, malformed word, odd lengths.
   */
  PATMAT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The operation is not defined for this pattern.
   */
  PATMAT_STATUS_UNSUPPORTED = 3,
  /**
   * The library failed internally; the error message has details.
   */
  PATMAT_STATUS_INTERNAL = 4,
} PatmatStatus;

/**
 * One computed limit: a value with its error bar and provenance.
 */
typedef struct PatmatEstimate PatmatEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *patmat_version(void);

/**
 * Message of the calling thread's most recent failure, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *patmat_last_error_message(void);

/**
 * Limiting fraction p(w) of `word` (lowercase letters, first occurrences in
 * alphabetical order) under `pattern`. Pass a null/empty `n_grid` for the
 * default extrapolation grid.
 *
 * # Safety
 * `pattern` and `word` must be NUL-terminated strings; `n_grid` must be null
 * or point to `n_grid_len` values; `out` must be a valid destination.
 */
enum PatmatStatus patmat_p_limit(const char *pattern,
                                 const char *word,
                                 const uint32_t *n_grid,
                                 uintptr_t n_grid_len,
                                 struct PatmatEstimate **out);

/**
 * Monte Carlo volume estimate of p(w); Toeplitz and Hankel only.
 *
 * # Safety
 * As for [`patmat_p_limit`].
 */
enum PatmatStatus patmat_mc_volume(const char *pattern,
                                   const char *word,
                                   uint64_t samples,
                                   uint64_t seed,
                                   struct PatmatEstimate **out);

/**
 * Limiting joint moment of the monomial `colors[0..colors_len]` under
 * `pattern`. Pass a null/empty `n_grid` for the default grid.
 *
 * # Safety
 * `pattern` must be a NUL-terminated string; `colors` must point to
 * `colors_len` values; `n_grid` as in [`patmat_p_limit`]; `out` must be a
 * valid destination.
 */
enum PatmatStatus patmat_moment(const char *pattern,
                                const uint32_t *colors,
                                uintptr_t colors_len,
                                const uint32_t *n_grid,
                                uintptr_t n_grid_len,
                                struct PatmatEstimate **out);

/**
 * Moment of the monomial under a reference law: "free", "classical" or
 * "half_independent".
 *
 * # Safety
 * As for [`patmat_moment`], with `law` a NUL-terminated string.
 */
enum PatmatStatus patmat_reference_moment(const char *law,
                                          const uint32_t *colors,
                                          uintptr_t colors_len,
                                          struct PatmatEstimate **out);

/**
 * Monte Carlo estimate of the joint moment by direct matrix simulation.
 * `distribution` is "rademacher" or "gaussian". Writes the replicate mean
 * and its standard error.
 *
 * # Safety
 * String and array arguments as above; `out_mean` and `out_std_error` must
 * be valid destinations.
 */
enum PatmatStatus patmat_simulate_moment(const char *pattern,
                                         const uint32_t *colors,
                                         uintptr_t colors_len,
                                         uint32_t n,
                                         uint64_t reps,
                                         const char *distribution,
                                         uint64_t seed,
                                         double *out_mean,
                                         double *out_std_error);

/**
 * Point estimate held by the handle.
 *
 * # Safety
 * `estimate` must be a live handle from this library.
 */
double patmat_estimate_value(const struct PatmatEstimate *estimate);

/**
 * Standard error of the estimate (0 for exact values).
 *
 * # Safety
 * `estimate` must be a live handle from this library.
 */
double patmat_estimate_std_error(const struct PatmatEstimate *estimate);

/**
 * True when the producing computation flagged quality problems.
 *
 * # Safety
 * `estimate` must be a live handle from this library.
 */
bool patmat_estimate_flagged(const struct PatmatEstimate *estimate);

/**
 * Name of the method that produced the estimate; owned by the handle.
 *
 * # Safety
 * `estimate` must be a live handle from this library.
 */
const char *patmat_estimate_method(const struct PatmatEstimate *estimate);

/**
 * Exact rational value as text ("2", "2/3"), or null when the estimate is
 * numeric only; owned by the handle.
 *
 * # Safety
 * `estimate` must be a live handle from this library.
 */
const char *patmat_estimate_exact(const struct PatmatEstimate *estimate);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `estimate` must be null or a handle not freed before.
 */
void patmat_estimate_free(struct PatmatEstimate *estimate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PATMAT_H */
