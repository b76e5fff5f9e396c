#ifndef KRONLAB_H
#define KRONLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  KL_INDEPENDENCE_INDEPENDENT_EXACT = 0,
  KL_INDEPENDENCE_DEPENDENT = 1,
  KL_INDEPENDENCE_NONE_FOUND_WITHIN_BOUNDS = 2,
} KlIndependence;

typedef enum {
  KL_METHOD_LATTICE = 0,
  KL_METHOD_GRID = 1,
} KlMethod;

typedef enum {
  KL_STATUS_OK = 0,
  KL_STATUS_NULL_POINTER = 1,
  KL_STATUS_INVALID_ARGUMENT = 2,
  KL_STATUS_PARSE = 3,
  /**
   * The search ran within its budget without success.
   */
  KL_STATUS_NOT_FOUND = 4,
  KL_STATUS_BUFFER_TOO_SMALL = 5,
  KL_STATUS_INTERNAL = 6,
} KlStatus;

typedef enum {
  KL_TIER_SYMBOLIC = 0,
  KL_TIER_NUMERIC = 1,
} KlTier;

/**
 * Opaque spectral measure.
 */
typedef struct KlMeasure KlMeasure;

/**
 * A witness time and its largest chord residual.
 */
typedef struct {
  double t;
  double max_residual;
} KlWitness;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next kronlab call on the same thread.
 */
const char *kl_last_error(void);

/**
 * Library version as a static string.
 */
const char *kl_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void kl_string_free(char *s);

/**
 * Parses a measure from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
KlStatus kl_measure_from_json(const char *json, KlMeasure **out_measure);

/**
 * # Safety
 * `m` must be null or a measure from [`kl_measure_from_json`], freed once.
 */
void kl_measure_free(KlMeasure *m);

/**
 * Canonical JSON of the measure; free with [`kl_string_free`].
 *
 * # Safety
 * `m` must be a live measure and `out_json` a valid pointer.
 */
KlStatus kl_measure_to_json(const KlMeasure *m, char **out_json);

/**
 * `integral exp(2 pi i t x) d sigma(x)`.
 *
 * # Safety
 * `m` must be a live measure; `re` and `im` valid pointers.
 */
KlStatus kl_measure_bochner(const KlMeasure *m, double t, double *re, double *im);

/**
 * Finds `t >= t_min` with `|exp(2 pi i t x_j) - exp(2 pi i phase_j)| < eps`
 * for all `j`. Points are numeric expressions such as `"sqrt(2)"`. On
 * `KL_STATUS_NOT_FOUND` the witness holds the best time examined.
 *
 * # Safety
 * `points` and `phases` must hold `n` entries; `witness` must be valid.
 */
KlStatus kl_solve_kronecker(const char *const *points,
                            const double *phases,
                            size_t n,
                            double eps,
                            double t_min,
                            KlMethod method,
                            KlWitness *witness);

/**
 * A Dirichlet witness: every `exp(2 pi i t x)` within `eps` of 1 over the
 * atoms of `m`.
 *
 * # Safety
 * `m` must be a live measure and `witness` valid.
 */
KlStatus kl_rigidity_witness(const KlMeasure *m,
                             double eps,
                             double t_min,
                             KlMethod method,
                             KlWitness *witness);

/**
 * Integer relation search with `|k_i| <= max_coeff`. On success writes `n`
 * coefficients; returns `KL_STATUS_NOT_FOUND` when none exists within the
 * bounds.
 *
 * # Safety
 * `values` must hold `n` strings and `coefficients` room for `n` entries.
 */
KlStatus kl_find_integer_relation(const char *const *values,
                                  size_t n,
                                  uint64_t max_coeff,
                                  size_t precision_bits,
                                  int64_t *coefficients);

/**
 * Rational independence of `n` values in the given tier. Symbolic values
 * use canonical text such as `"0+1*tau^2"` or `"tau^2"`.
 *
 * # Safety
 * `values` must hold `n` strings and `verdict` be valid.
 */
KlStatus kl_check_independence(const char *const *values,
                               size_t n,
                               KlTier tier,
                               uint64_t max_coeff,
                               KlIndependence *verdict);

/**
 * Simulates `paths` paths of the real stationary Gaussian process with
 * spectral measure `m` on `t0 + k * step`, `k < count`. Values are written
 * row-major, path by path, into `values`, which must hold `len` doubles.
 *
 * # Safety
 * `m` must be a live measure and `values` point to `len` writable doubles.
 */
KlStatus kl_simulate(const KlMeasure *m,
                     double t0,
                     double step,
                     size_t count,
                     size_t paths,
                     uint64_t seed,
                     double *values,
                     size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KRONLAB_H */
