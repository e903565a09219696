/* Generated by cbindgen from src/lib.rs; do not edit. */

#ifndef DIRICHLET_TAILS_H
#define DIRICHLET_TAILS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes.
typedef enum DtStatus {
  DT_STATUS_OK = 0,
  DT_STATUS_NULL_POINTER = 1,
  DT_STATUS_DOMAIN = 2,
  DT_STATUS_VALIDATION = 3,
  DT_STATUS_WRONG_REGIME = 4,
  DT_STATUS_UNSUPPORTED_CLASS = 5,
  DT_STATUS_UNSUPPORTED = 6,
  DT_STATUS_NUMERIC = 7,
  DT_STATUS_INVALID_UTF8 = 8,
  DT_STATUS_PANIC = 9,
} DtStatus;

// Radial families for [`dt_spec_new`].
typedef enum DtFamily {
  // `param1` = shape, `param2` = rate.
  DT_FAMILY_GAMMA = 0,
  // `F̄(x) = exp(-param2 x^param1)`.
  DT_FAMILY_WEIBULL_TAIL = 1,
  // `param1` = a, `param2` = b.
  DT_FAMILY_BETA = 2,
  // `F̄(x) = exp(param1 - param1/(1-x))` on `[0, 1)`; `param2` is ignored.
  DT_FAMILY_UNIT_GUMBEL = 3,
} DtFamily;

// The tail asymptotic of a specification.
typedef struct DtAsymptotic DtAsymptotic;

// A validated aggregate specification.
typedef struct DtSpec DtSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a specification from `d` Dirichlet parameters and weights.
//
// # Safety
// `alpha` and `lambda` must point to `d` readable doubles; `out` must be
// writable. On success `*out` owns a handle for [`dt_spec_free`].
enum DtStatus dt_spec_new(const double *alpha,
                          const double *lambda,
                          size_t d,
                          double p,
                          enum DtFamily family,
                          double param1,
                          double param2,
                          struct DtSpec **out);

// Builds a specification from its JSON form
// `{"alpha": [...], "lambda": [...], "p": x, "radial": {...}}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum DtStatus dt_spec_from_json(const char *json, struct DtSpec **out);

// Releases a specification; null is ignored.
//
// # Safety
// `spec` must come from this library and not be used afterwards.
void dt_spec_free(struct DtSpec *spec);

// Number of components.
//
// # Safety
// Pointers must be valid.
enum DtStatus dt_spec_dimension(const struct DtSpec *spec, size_t *out);

// The tail asymptotic of the regime that applies to `spec`.
//
// # Safety
// Pointers must be valid. On success `*out` owns a handle for
// [`dt_asymptotic_free`].
enum DtStatus dt_asymptotic_new(const struct DtSpec *spec, struct DtAsymptotic **out);

// Releases an asymptotic; null is ignored.
//
// # Safety
// `asym` must come from this library and not be used afterwards.
void dt_asymptotic_free(struct DtAsymptotic *asym);

// `ln K` and `ρ`.
//
// # Safety
// Pointers must be valid.
enum DtStatus dt_asymptotic_params(const struct DtAsymptotic *asym, double *ln_k, double *rho);

// Predicted `ln P(S_p > t)`.
//
// # Safety
// Pointers must be valid.
enum DtStatus dt_asymptotic_log_tail(const struct DtAsymptotic *asym, double t, double *out);

// Threshold at which the radial base variable has `ln F̄ = ln_depth`.
//
// # Safety
// Pointers must be valid.
enum DtStatus dt_asymptotic_threshold_at_depth(const struct DtAsymptotic *asym,
                                               double ln_depth,
                                               double *out);

// Threshold where the predicted log tail equals `ln_prob`.
//
// # Safety
// Pointers must be valid.
enum DtStatus dt_asymptotic_invert(const struct DtAsymptotic *asym, double ln_prob, double *out);

// Asymptotic VaR and mean excess at level `b`.
//
// # Safety
// Pointers must be valid.
enum DtStatus dt_var_es(const struct DtSpec *spec, double b, double *var, double *es_minus_var);

// Conditional Monte Carlo estimate of `ln P(S_p > t)` and the log of its
// standard error.
//
// # Safety
// Pointers must be valid.
enum DtStatus dt_conditional_mc(const struct DtSpec *spec,
                                double t,
                                uint64_t n,
                                uint64_t seed,
                                size_t workers,
                                double *log_p,
                                double *log_stderr);

// Quadrature value of `ln P(S_p > t)` for up to three components.
//
// # Safety
// Pointers must be valid.
enum DtStatus dt_quadrature_log_tail(const struct DtSpec *spec, double t, double *out);

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`) and returns the full message length.
// With a null `buf` only the length is returned.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t dt_last_error_message(char *buf, size_t len);

// Static description of a status code.
const char *dt_status_name(enum DtStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIRICHLET_TAILS_H */
