#ifndef SINGBERN_H
#define SINGBERN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SbStatus {
  SB_STATUS_OK = 0,
  SB_STATUS_NULL_POINTER = 1,
  SB_STATUS_INVALID_ARGUMENT = 2,
  SB_STATUS_SINGULAR_SYSTEM = 3,
  SB_STATUS_DOMAIN = 4,
  SB_STATUS_N_TOO_SMALL = 5,
  SB_STATUS_NUMERICAL = 6,
  SB_STATUS_CONFIG = 7,
  SB_STATUS_BUFFER_TOO_SMALL = 8,
  SB_STATUS_PANIC = 9,
} SbStatus;

typedef enum SbLadder {
  SB_LADDER_DOUBLING = 0,
  SB_LADDER_ARITHMETIC = 1,
} SbLadder;

/**
 * Builtin corpus function.
 */
typedef struct SbCorpusFunction SbCorpusFunction;

/**
 * Modified operator built from samples of a callback.
 */
typedef struct SbModified SbModified;

/**
 * Solved cutoff polynomial.
 */
typedef struct SbPsi SbPsi;

/**
 * Combination degrees and coefficients.
 */
typedef struct SbScheme SbScheme;

/**
 * `f(x, user_data)`, sampled on `[0, 1]`.
 */
typedef double (*SbFunction)(double x, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next `sb_` call on the same thread.
 */
const char *sb_last_error_message(void);

/**
 * `p_{n,k}(x)`; zero outside `0..=n`.
 */
double sb_basis(size_t n, int64_t k, double x);

/**
 * `ln C(n, k)`; `-inf` outside `0..=n`.
 */
double sb_log_binomial(uint64_t n, int64_t k);

/**
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum SbStatus sb_psi_new(size_t r, struct SbPsi **out);

/**
 * `ψ(x)`; NaN for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle from [`sb_psi_new`].
 */
double sb_psi_eval(const struct SbPsi *h, double x);

/**
 * Copies the `2r+1` coefficients of `x^{2r+1}..x^{4r+1}` into `buf`.
 * `written` (optional) receives the required length.
 *
 * # Safety
 * `h` must be a live handle; `buf` must hold `len` doubles.
 */
enum SbStatus sb_psi_coeffs(const struct SbPsi *h, double *buf, size_t len, size_t *written);

/**
 * # Safety
 * `h` must be null or a handle from [`sb_psi_new`] not yet freed.
 */
void sb_psi_free(struct SbPsi *h);

/**
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum SbStatus sb_scheme_new(size_t n, size_t r, enum SbLadder ladder, struct SbScheme **out);

/**
 * Number of terms; 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t sb_scheme_len(const struct SbScheme *h);

/**
 * # Safety
 * `h` must be a live handle; `buf` must hold `len` values.
 */
enum SbStatus sb_scheme_degrees(const struct SbScheme *h, size_t *buf, size_t len, size_t *written);

/**
 * # Safety
 * `h` must be a live handle; `buf` must hold `len` doubles.
 */
enum SbStatus sb_scheme_coeffs(const struct SbScheme *h, double *buf, size_t len, size_t *written);

/**
 * # Safety
 * `h` must be null or a handle from [`sb_scheme_new`] not yet freed.
 */
void sb_scheme_free(struct SbScheme *h);

/**
 * Builds `B̄_{n,r−1}` for `f`. The callback is only invoked during this call.
 *
 * # Safety
 * `f` must be safe to call with `user_data`; `out` must be valid for a write.
 */
enum SbStatus sb_modified_new(SbFunction f,
                              void *user_data,
                              size_t n,
                              size_t r,
                              double xi,
                              enum SbLadder ladder,
                              struct SbModified **out);

/**
 * # Safety
 * `h` must be a live handle; `out` must be valid for a write.
 */
enum SbStatus sb_modified_eval(const struct SbModified *h, double x, double *out);

/**
 * `B̄^{(order)}_{n,r−1}(f, x)`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be valid for a write.
 */
enum SbStatus sb_modified_deriv(const struct SbModified *h, size_t order, double x, double *out);

/**
 * # Safety
 * `h` must be null or a handle from [`sb_modified_new`] not yet freed.
 */
void sb_modified_free(struct SbModified *h);

/**
 * Looks up a builtin such as `"abspow(1.5)"` or `"sin"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be valid for a write.
 */
enum SbStatus sb_corpus_new(const char *name, double xi, struct SbCorpusFunction **out);

/**
 * `f(x)`; NaN for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
double sb_corpus_eval(const struct SbCorpusFunction *h, double x);

/**
 * # Safety
 * `h` must be null or a handle from [`sb_corpus_new`] not yet freed.
 */
void sb_corpus_free(struct SbCorpusFunction *h);

/**
 * Weighted modulus `ω_φ^r(f, t)_w̄` with `w̄ = |x − xi|^alpha` and
 * `φ = x^beta0 (1 − x)^beta1`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be valid for a write.
 */
enum SbStatus sb_weighted_modulus(const struct SbCorpusFunction *h,
                                  double xi,
                                  double alpha,
                                  double beta0,
                                  double beta1,
                                  size_t r,
                                  double t,
                                  size_t x_grid_size,
                                  size_t h_grid_size,
                                  double *out);

/**
 * Runs an experiment from a JSON config and returns the report rendered in
 * the config's format. Release the string with [`sb_string_free`].
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must be valid for a write.
 */
enum SbStatus sb_run_config(const char *config_json, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void sb_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sb_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SINGBERN_H */
