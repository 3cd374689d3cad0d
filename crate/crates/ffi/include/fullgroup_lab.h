#ifndef FULLGROUP_LAB_H
#define FULLGROUP_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Named step laws for [`fgl_prob_event`].
 */
typedef enum FglLaw {
  /**
   * uniform on {-1, 1}
   */
  FGL_LAW_UNIFORM2 = 0,
  /**
   * uniform on {±1/2, ±1}
   */
  FGL_LAW_UNIFORM4 = 1,
  /**
   * uniform on {±1/3, ±1}
   */
  FGL_LAW_UNIFORM4B = 2,
} FglLaw;

typedef enum FglStatus {
  FGL_STATUS_OK = 0,
  FGL_STATUS_NULL_POINTER = 1,
  FGL_STATUS_INVALID_ARGUMENT = 2,
  FGL_STATUS_INFEASIBLE = 3,
  FGL_STATUS_CERTIFICATE_FAILURE = 4,
  FGL_STATUS_BUFFER_TOO_SMALL = 5,
  FGL_STATUS_PANIC = 6,
} FglStatus;

/**
 * Built box levels for one `λ`.
 */
typedef struct FglLevels FglLevels;

/**
 * The packed Toeplitz point for one parameter `z`.
 */
typedef struct FglToeplitz FglToeplitz;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version string of the library, static storage.
 */
const char *fgl_version(void);

/**
 * Last error on this thread; `needed` receives the required buffer size.
 *
 * # Safety
 * `buf` must be writable for `len` bytes; `needed` may be null.
 */
enum FglStatus fgl_last_error_message(char *buf, size_t len, size_t *needed);

/**
 * Builds `levels` levels of the default schedule for `λ = num/den`.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle to be
 * released with [`fgl_levels_free`].
 */
enum FglStatus fgl_levels_build(int64_t num,
                                int64_t den,
                                uint32_t levels,
                                uint64_t budget,
                                uint64_t seed,
                                struct FglLevels **out);

/**
 * # Safety
 * `h` must come from [`fgl_levels_build`] and not be used afterwards.
 */
void fgl_levels_free(struct FglLevels *h);

/**
 * # Safety
 * `h` must be a live handle; `count` writable.
 */
enum FglStatus fgl_levels_count(const struct FglLevels *h, uint32_t *count);

/**
 * Dimensions and free-cell count of level `k` (1-based).
 *
 * # Safety
 * `h` must be a live handle; the out pointers writable.
 */
enum FglStatus fgl_levels_level(const struct FglLevels *h,
                                uint32_t k,
                                int64_t *a,
                                int64_t *b,
                                uint64_t *free_cells);

/**
 * Re-checks every level; `passed` is 1 when all conditions hold.
 *
 * # Safety
 * `h` must be a live handle; `passed` writable.
 */
enum FglStatus fgl_levels_verify(const struct FglLevels *h, uint8_t *passed);

/**
 * Symbol at `(x, y)` of the canonical point, or of a seeded point when
 * `use_seed` is nonzero.
 *
 * # Safety
 * `h` must be a live handle; `sym` writable.
 */
enum FglStatus fgl_levels_eval(const struct FglLevels *h,
                               uint8_t use_seed,
                               uint64_t seed,
                               int64_t x,
                               int64_t y,
                               uint32_t *sym);

/**
 * Witness table for all reduced words up to `max_len`. `rows` gets the
 * number of witnessed words, `missing` the rest; `exact` is 1 when every
 * displacement is `(0, 6rm)` and every generator is an involution.
 *
 * # Safety
 * `h` must be a live handle; the out pointers writable.
 */
enum FglStatus fgl_free_product(const struct FglLevels *h,
                                uint32_t max_len,
                                uint64_t *rows,
                                uint64_t *missing,
                                uint8_t *exact);

/**
 * Exact `P(W ≤ −U < V)` where `U, V, W` are independent sums of `j, k, l`
 * steps, written as `"p/q"`.
 *
 * # Safety
 * `buf` must be writable for `len` bytes; `needed` may be null.
 */
enum FglStatus fgl_prob_event(enum FglLaw law,
                              uint32_t j,
                              uint32_t k,
                              uint32_t l,
                              char *buf,
                              size_t len,
                              size_t *needed);

/**
 * `|W′|/|W|` for 3-cycles on `n′ ≤ n` points, as `"p/q"`.
 *
 * # Safety
 * `buf` must be writable for `len` bytes; `needed` may be null.
 */
enum FglStatus fgl_inner_amenability_ratio(uint64_t n,
                                           uint64_t n_prime,
                                           char *buf,
                                           size_t len,
                                           size_t *needed);

/**
 * Packed point of the Toeplitz labeling for `z` given as `prefix:rule`.
 *
 * # Safety
 * `z` must be a NUL-terminated string; `out` writable. Release with
 * [`fgl_toeplitz_free`].
 */
enum FglStatus fgl_toeplitz_new(const char *z, struct FglToeplitz **out);

/**
 * # Safety
 * `h` must come from [`fgl_toeplitz_new`] and not be used afterwards.
 */
void fgl_toeplitz_free(struct FglToeplitz *h);

/**
 * Packed symbol (0..36) at `(x, y)`.
 *
 * # Safety
 * `h` must be a live handle; `sym` writable.
 */
enum FglStatus fgl_toeplitz_eval(const struct FglToeplitz *h, int64_t x, int64_t y, uint32_t *sym);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FULLGROUP_LAB_H */
