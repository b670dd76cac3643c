#ifndef QDIFF_H
#define QDIFF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QdiffStatus {
  QDIFF_STATUS_OK = 0,
  QDIFF_STATUS_NULL_POINTER = 1,
  QDIFF_STATUS_INVALID_UTF8 = 2,
  QDIFF_STATUS_BUFFER_TOO_SMALL = 3,
  QDIFF_STATUS_INVALID_PERMUTATION = 10,
  QDIFF_STATUS_AUXILIARY_SUM_NONZERO = 11,
  QDIFF_STATUS_BUDGET_EXCEEDED = 12,
  QDIFF_STATUS_NOT_EVEN = 13,
  QDIFF_STATUS_INVALID_PARTITION = 14,
  QDIFF_STATUS_BAD_SPLIT = 15,
  QDIFF_STATUS_DIVERGENT_BOUND = 16,
  QDIFF_STATUS_QUADRATURE_FAILURE = 17,
  QDIFF_STATUS_OUT_OF_TABLE = 18,
  QDIFF_STATUS_HYPOTHESIS_VIOLATED = 19,
  QDIFF_STATUS_DEGENERATE_FREQUENCIES = 20,
  QDIFF_STATUS_KAPPA_TOO_LARGE = 21,
  QDIFF_STATUS_INSUFFICIENT_SAMPLES = 22,
  QDIFF_STATUS_GRID_TOO_COARSE = 23,
  QDIFF_STATUS_CFL_VIOLATION = 24,
  QDIFF_STATUS_CONFIG_INVALID = 25,
  QDIFF_STATUS_PANIC = 99,
} QdiffStatus;

/**
 * The momentum jump process on one energy shell, Gaussian potential.
 */
typedef struct QdiffJumpProcess QdiffJumpProcess;

/**
 * A parsed permutation of {1..k}.
 */
typedef struct QdiffPermutation QdiffPermutation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call on the same thread.
 */
const char *qdiff_last_error(void);

/**
 * Library version, static storage.
 */
const char *qdiff_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void qdiff_string_free(char *s);

/**
 * Parses "1 2 7 6", "1,2,7,6" or "(1,2,7,6)".
 *
 * # Safety
 * `s` must be a NUL-terminated string and `result` writable.
 */
enum QdiffStatus qdiff_perm_parse(const char *s, struct QdiffPermutation **result);

/**
 * # Safety
 * `perm` must come from `qdiff_perm_parse` and not be freed twice.
 */
void qdiff_perm_free(struct QdiffPermutation *perm);

/**
 * # Safety
 * `perm` must be a live handle, `k` writable.
 */
enum QdiffStatus qdiff_perm_order(const struct QdiffPermutation *perm, size_t *k);

/**
 * deg σ = k − |I_ℓ|
 *
 * # Safety
 * `perm` must be a live handle, `degree` writable.
 */
enum QdiffStatus qdiff_perm_degree(const struct QdiffPermutation *perm, size_t *degree);

/**
 * Full index classification as JSON; free with `qdiff_string_free`.
 *
 * # Safety
 * `perm` must be a live handle, `json` writable.
 */
enum QdiffStatus qdiff_perm_classify_json(const struct QdiffPermutation *perm, char **json);

/**
 * Writes the (k+1)×(k+1) tower matrix row-major into `buf`. `len` must be
 * at least (k+1)²; the needed size is written to `needed` either way.
 *
 * # Safety
 * `buf` must hold `len` elements; `needed` may be NULL.
 */
enum QdiffStatus qdiff_perm_tower_matrix(const struct QdiffPermutation *perm,
                                         int64_t *buf,
                                         size_t len,
                                         size_t *needed);

/**
 * Ursell coefficient c(n); `lattice` selects the lattice gas, otherwise
 * the continuum Poisson field.
 *
 * # Safety
 * `value` must be writable.
 */
enum QdiffStatus qdiff_ursell(size_t n, bool lattice, int64_t *value);

/**
 * Θ_ε(α) for the Gaussian potential in dimension `d`.
 *
 * # Safety
 * `re` and `im` must be writable.
 */
enum QdiffStatus qdiff_theta(double alpha, double epsilon, size_t d, double *re, double *im);

/**
 * # Safety
 * `result` must be writable.
 */
enum QdiffStatus qdiff_jump_new(double e, size_t d, struct QdiffJumpProcess **result);

/**
 * # Safety
 * `p` must come from `qdiff_jump_new` and not be freed twice.
 */
void qdiff_jump_free(struct QdiffJumpProcess *p);

/**
 * Total rate σ₀ and the first angular moment σ₁.
 *
 * # Safety
 * `p` must be a live handle; outputs writable.
 */
enum QdiffStatus qdiff_jump_rates(const struct QdiffJumpProcess *p, double *sigma0, double *sigma1);

/**
 * # Safety
 * `p` must be a live handle, `value` writable.
 */
enum QdiffStatus qdiff_jump_diffusion_closed_form(const struct QdiffJumpProcess *p, double *value);

/**
 * Green–Kubo Monte Carlo estimate over `ntraj` trajectories.
 *
 * # Safety
 * `p` must be a live handle; outputs writable.
 */
enum QdiffStatus qdiff_jump_diffusion_monte_carlo(const struct QdiffJumpProcess *p,
                                                  size_t ntraj,
                                                  uint64_t seed,
                                                  double *value,
                                                  double *std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDIFF_H */
