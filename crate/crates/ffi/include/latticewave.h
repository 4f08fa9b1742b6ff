#ifndef LATTICEWAVE_H
#define LATTICEWAVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum LwStatus {
  LW_STATUS_OK = 0,
  /**
   * A check ran to completion and failed; the report explains why.
   */
  LW_STATUS_CHECK_FAILED = 1,
  LW_STATUS_NULL_POINTER = 2,
  LW_STATUS_INVALID_UTF8 = 3,
  LW_STATUS_PARSE = 4,
  LW_STATUS_INVALID_MATRIX = 5,
  LW_STATUS_DIMENSION_MISMATCH = 6,
  LW_STATUS_NO_PROGRESS = 7,
  LW_STATUS_UNSUPPORTED = 8,
  LW_STATUS_INTERNAL = 9,
  LW_STATUS_PANIC = 10,
} LwStatus;

/**
 * Dilation matrix handle.
 */
typedef struct LwMatrix LwMatrix;

/**
 * Frequency set handle.
 */
typedef struct LwSet LwSet;

/**
 * Piecewise-constant wavelet handle.
 */
typedef struct LwWavelet LwWavelet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from the same thread.
 */
const char *lw_last_error(void);

/**
 * Releases a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void lw_string_free(char *s);

/**
 * Looks up `dyadic1d`, `triadic1d`, `quincunx` or `dyadic2d`, or parses a
 * JSON document `{"matrix": [[...]]}` / `[[...]]` holding the rows of `A`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LwStatus lw_matrix_new(const char *spec, struct LwMatrix **out);

/**
 * # Safety
 * `m` must be NULL or a handle from this library that has not been freed.
 */
void lw_matrix_free(struct LwMatrix *m);

/**
 * Dimension `n` and `a = |det A|`.
 *
 * # Safety
 * `m` must be a live handle; `n` and `a` valid pointers or NULL.
 */
enum LwStatus lw_matrix_info(const struct LwMatrix *m, size_t *n, uint64_t *a);

/**
 * `{"digits": [[...]], "a": a}` for the canonical digit set of `A`.
 *
 * # Safety
 * `m` must be a live handle and `json` a valid pointer.
 */
enum LwStatus lw_matrix_digits(const struct LwMatrix *m, char **json);

/**
 * Parses the frequency-set JSON schema, or looks up `shannon-set` / `journe-set`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LwStatus lw_set_new(const char *spec, struct LwSet **out);

/**
 * # Safety
 * `s` must be NULL or a handle from this library that has not been freed.
 */
void lw_set_free(struct LwSet *s);

/**
 * Exact volume in 2π-units as a `"p/q"` string.
 *
 * # Safety
 * `s` must be a live handle and `volume` a valid pointer.
 */
enum LwStatus lw_set_volume(const struct LwSet *s, char **volume);

/**
 * Checks both tiling conditions. Returns `Ok` on pass and `CheckFailed`
 * otherwise; the report JSON is stored in `*report` when it is non-null.
 *
 * # Safety
 * `s` and `m` must be live handles; `report` a valid pointer or NULL.
 */
enum LwStatus lw_verify_set(const struct LwSet *s,
                            const struct LwMatrix *m,
                            size_t samples,
                            uint64_t seed,
                            char **report);

/**
 * Parses the wavelet schema. `m` may be NULL when the document names its matrix.
 *
 * # Safety
 * `json` must be NUL-terminated, `m` NULL or a live handle, `out` valid.
 */
enum LwStatus lw_wavelet_new(const char *json, const struct LwMatrix *m, struct LwWavelet **out);

/**
 * `χ_K` for a wavelet set `K`.
 *
 * # Safety
 * `s` and `m` must be live handles and `out` a valid pointer.
 */
enum LwStatus lw_wavelet_indicator(const struct LwSet *s,
                                   const struct LwMatrix *m,
                                   struct LwWavelet **out);

/**
 * # Safety
 * `w` must be NULL or a handle from this library that has not been freed.
 */
void lw_wavelet_free(struct LwWavelet *w);

/**
 * Serializes the wavelet schema.
 *
 * # Safety
 * `w` must be a live handle and `json` a valid pointer.
 */
enum LwStatus lw_wavelet_to_json(const struct LwWavelet *w, char **json);

/**
 * Runs every wavelet check of `verify_all`.
 *
 * # Safety
 * `w` must be a live handle; `report` a valid pointer or NULL.
 */
enum LwStatus lw_verify_wavelet(const struct LwWavelet *w,
                                size_t samples,
                                uint64_t seed,
                                char **report);

/**
 * Verifies `w` and stores its class: `r` for `M_r`, `-1` for `M_inf`.
 * A wavelet that fails verification gives `CheckFailed`.
 *
 * # Safety
 * `w` must be a live handle, `class_r` valid, `report` valid or NULL.
 */
enum LwStatus lw_classify(const struct LwWavelet *w,
                          size_t samples,
                          uint64_t seed,
                          int32_t *class_r,
                          char **report);

/**
 * Builds the wavelet of class `M_r` from a seed drawn with `seed`, requiring
 * an exact completion within `max_iter` iterations. The construction report
 * JSON is stored in `*report` when it is non-null.
 *
 * # Safety
 * `m` must be a live handle, `out` valid, `report` valid or NULL.
 */
enum LwStatus lw_construct(const struct LwMatrix *m,
                           uint32_t r,
                           uint64_t seed,
                           uint32_t max_iter,
                           struct LwWavelet **out,
                           char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LATTICEWAVE_H */
