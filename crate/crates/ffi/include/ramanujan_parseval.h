#ifndef RAMANUJAN_PARSEVAL_H
#define RAMANUJAN_PARSEVAL_H

/* Generated with cbindgen:0.29.4 */

/* Regenerated by build.rs; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RpStatus {
  RP_STATUS_OK = 0,
  RP_STATUS_NULL_POINTER = 1,
  RP_STATUS_DOMAIN = 2,
  RP_STATUS_LIMIT_EXCEEDED = 3,
  RP_STATUS_OVERFLOW = 4,
  RP_STATUS_TABLE_TOO_SHORT = 5,
  RP_STATUS_OUT_OF_RANGE = 6,
  RP_STATUS_DECAY_VIOLATION = 7,
  RP_STATUS_CAP_EXCEEDED = 8,
  RP_STATUS_DEGENERATE_FIT = 9,
  RP_STATUS_FORMAT = 10,
  RP_STATUS_IO = 11,
  RP_STATUS_PANIC = 12,
  RP_STATUS_INTERNAL = 13,
} RpStatus;

typedef enum RpRoute {
  RP_ROUTE_SERIES_PHI = 0,
  RP_ROUTE_SERIES_SHIFT = 1,
  RP_ROUTE_CLOSED_SIGMA = 2,
  RP_ROUTE_EULER_PHI = 3,
} RpRoute;

/**
 * Ramanujan coefficients of `sigma_s(n)/n^s` or `phi_s(n)/n^s`.
 */
typedef struct RpFamily RpFamily;

/**
 * Mertens prefix sums `M(0..=limit)`.
 */
typedef struct RpMertens RpMertens;

/**
 * A sieved arithmetic function on `1..=limit`.
 */
typedef struct RpTable RpTable;

/**
 * Predicted coefficient of `N` in `sum_{n <= N} f(n) g(n + h)`.
 */
typedef struct RpPrediction {
  double value;
  double tail_estimate;
  enum RpRoute route;
} RpPrediction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *rp_last_error(void);

void rp_clear_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rp_version(void);

/**
 * # Safety
 * `out_value` must be valid for writes.
 */
enum RpStatus rp_ramanujan_sum(uint64_t r, uint64_t n, int64_t *out_value);

/**
 * # Safety
 * `out_value` must be valid for writes.
 */
enum RpStatus rp_zeta(double z, double *out_value);

/**
 * # Safety
 * `out_value` must be valid for writes.
 */
enum RpStatus rp_optimal_u(double n, double delta, double *out_value);

/**
 * # Safety
 * `out_value` must be valid for writes.
 */
enum RpStatus rp_error_bound(double n, double delta, double c, double *out_value);

/**
 * `mu(1..=limit)`.
 *
 * # Safety
 * `out_table` must be valid for writes.
 */
enum RpStatus rp_table_mobius(size_t limit, struct RpTable **out_table);

/**
 * # Safety
 * `out_table` must be valid for writes.
 */
enum RpStatus rp_table_euler_phi(size_t limit, struct RpTable **out_table);

/**
 * # Safety
 * `out_table` must be valid for writes.
 */
enum RpStatus rp_table_divisor_k(uint32_t k, size_t limit, struct RpTable **out_table);

/**
 * `sigma_s(n) / n^s`.
 *
 * # Safety
 * `out_table` must be valid for writes.
 */
enum RpStatus rp_table_sigma_ratio(double s, size_t limit, struct RpTable **out_table);

/**
 * `phi_s(n) / n^s`.
 *
 * # Safety
 * `out_table` must be valid for writes.
 */
enum RpStatus rp_table_phi_ratio(double s, size_t limit, struct RpTable **out_table);

/**
 * Reads a table in the binary table format.
 *
 * # Safety
 * `file` must be a NUL-terminated string and `out_table` valid for writes.
 */
enum RpStatus rp_table_read(const char *file, struct RpTable **out_table);

/**
 * Writes a table in the binary table format.
 *
 * # Safety
 * `table` must come from this library and `file` be a NUL-terminated string.
 */
enum RpStatus rp_table_write(const struct RpTable *table, const char *file);

/**
 * # Safety
 * `table` must come from this library; `out_limit` must be valid for writes.
 */
enum RpStatus rp_table_limit(const struct RpTable *table, size_t *out_limit);

/**
 * Value at `n`, `1 <= n <= limit`.
 *
 * # Safety
 * `table` must come from this library; `out_value` must be valid for writes.
 */
enum RpStatus rp_table_get(const struct RpTable *table, size_t n, double *out_value);

/**
 * # Safety
 * `table` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void rp_table_free(struct RpTable *table);

/**
 * Compensated `sum_{n <= N} f(n) g(n + h)`.
 *
 * # Safety
 * `f` and `g` must come from this library; `out_value` must be valid for writes.
 */
enum RpStatus rp_correlate(const struct RpTable *f,
                           const struct RpTable *g,
                           size_t h,
                           size_t n,
                           double *out_value);

/**
 * # Safety
 * `out_mertens` must be valid for writes.
 */
enum RpStatus rp_mertens_new(size_t limit, struct RpMertens **out_mertens);

/**
 * `M(n)` for `0 <= n <= limit`.
 *
 * # Safety
 * `mertens` must come from this library; `out_value` must be valid for writes.
 */
enum RpStatus rp_mertens_get(const struct RpMertens *mertens, size_t n, int64_t *out_value);

/**
 * `sum_{r <= x} c_r(h) = sum_{d | h} d M(x / d)`.
 *
 * # Safety
 * `mertens` must come from this library; `out_value` must be valid for writes.
 */
enum RpStatus rp_ramanujan_partial_sum(const struct RpMertens *mertens,
                                       uint64_t h,
                                       double x,
                                       int64_t *out_value);

/**
 * # Safety
 * `mertens` must come from this library and not be used afterwards.
 */
void rp_mertens_free(struct RpMertens *mertens);

/**
 * Coefficients of `sigma_s(n) / n^s`.
 *
 * # Safety
 * `out_family` must be valid for writes.
 */
enum RpStatus rp_family_sigma(double s, struct RpFamily **out_family);

/**
 * Coefficients of `phi_s(n) / n^s`.
 *
 * # Safety
 * `out_family` must be valid for writes.
 */
enum RpStatus rp_family_phi(double s, struct RpFamily **out_family);

/**
 * Coefficient at `r >= 1`.
 *
 * # Safety
 * `family` must come from this library; `out_value` must be valid for writes.
 */
enum RpStatus rp_family_coefficient(const struct RpFamily *family, uint64_t r, double *out_value);

/**
 * Declared decay exponent and constant of `|f^(r)| <= C r^-(1 + delta)`.
 *
 * # Safety
 * `family` must come from this library; both out-pointers must be valid.
 */
enum RpStatus rp_family_decay(const struct RpFamily *family,
                              double *out_delta,
                              double *out_constant);

/**
 * `sum_{r <= R} f^(r) c_r(n)` and a bound on what was dropped.
 *
 * # Safety
 * `family` must come from this library; both out-pointers must be valid.
 */
enum RpStatus rp_expansion(const struct RpFamily *family,
                           uint64_t n,
                           size_t r_max,
                           double *out_value,
                           double *out_tail_bound);

/**
 * Main term of the correlation of two families at shift `h`: a closed form
 * for two sigma or two phi families with `h >= 1`, the series over
 * `r <= r_max` otherwise.
 *
 * # Safety
 * `f` and `g` must come from this library; `out_prediction` must be valid.
 */
enum RpStatus rp_main_term(const struct RpFamily *f,
                           const struct RpFamily *g,
                           uint64_t h,
                           size_t r_max,
                           uint64_t prime_limit,
                           struct RpPrediction *out_prediction);

/**
 * # Safety
 * `family` must come from this library and not be used afterwards.
 */
void rp_family_free(struct RpFamily *family);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAMANUJAN_PARSEVAL_H */
