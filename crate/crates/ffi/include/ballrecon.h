#ifndef BALLRECON_H
#define BALLRECON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BrPremeasureKind {
  /**
   * `q(B) = mu(B)`.
   */
  BR_PREMEASURE_KIND_EXACT = 0,
  /**
   * `q(B_r) = (1/r) int_0^r mu(B_s) ds`.
   */
  BR_PREMEASURE_KIND_AVERAGED = 1,
} BrPremeasureKind;

typedef enum BrStatus {
  BR_STATUS_OK = 0,
  BR_STATUS_NULL_POINTER = 1,
  BR_STATUS_INVALID_ARGUMENT = 2,
  BR_STATUS_DOMAIN_ERROR = 3,
  /**
   * A bound could not be met, e.g. too many Besicovitch subfamilies.
   */
  BR_STATUS_INFEASIBLE = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  BR_STATUS_PANIC = 5,
} BrStatus;

/**
 * Signed measure on Euclidean space: atoms plus polyline chains.
 */
typedef struct BrMeasure BrMeasure;

typedef struct BrPremeasure BrPremeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *br_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *br_last_error(void);

/**
 * Create the zero measure on `R^dim`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum BrStatus br_measure_new(size_t dim, struct BrMeasure **out);

/**
 * # Safety
 * `m` is null or came from `br_measure_new` and was not freed.
 */
void br_measure_free(struct BrMeasure *m);

/**
 * Add an atom of the given (nonzero) weight at `coords[0..dim]`.
 *
 * # Safety
 * `m` is a live handle and `coords` holds `dim` values.
 */
enum BrStatus br_measure_add_atom(struct BrMeasure *m,
                                  const double *coords,
                                  size_t dim,
                                  double weight);

/**
 * Add length measure times `density` along the polyline through
 * `n_vertices` vertices stored flat in `vertices`.
 *
 * # Safety
 * `m` is a live handle and `vertices` holds `n_vertices * dim` values.
 */
enum BrStatus br_measure_add_chain(struct BrMeasure *m,
                                   const double *vertices,
                                   size_t n_vertices,
                                   double density);

/**
 * Mass of the closed ball of `radius` about `center`.
 *
 * # Safety
 * `m` is a live handle, `center` holds the measure's `dim` values and `out`
 * is valid for writes.
 */
enum BrStatus br_measure_ball_mass(const struct BrMeasure *m,
                                   const double *center,
                                   double radius,
                                   double *out);

/**
 * Premeasure of the given kind over a copy of `m`.
 *
 * # Safety
 * `m` is a live handle and `out` is valid for writes.
 */
enum BrStatus br_premeasure_new(const struct BrMeasure *m,
                                enum BrPremeasureKind kind,
                                struct BrPremeasure **out);

/**
 * # Safety
 * `q` is null or came from `br_premeasure_new` and was not freed.
 */
void br_premeasure_free(struct BrPremeasure *q);

/**
 * # Safety
 * `q` is a live handle, `center` holds `dim` values and `out` is valid for
 * writes.
 */
enum BrStatus br_premeasure_evaluate(const struct BrPremeasure *q,
                                     const double *center,
                                     double radius,
                                     double *out);

/**
 * Covering sweep over the finite target set `targets` (`n_targets` points).
 * Writes the cover value at each of the `n_deltas` scales to `values`,
 * the value at the smallest scale to `limit`, and whether every step was
 * solved exactly to `all_exact`.
 *
 * # Safety
 * All arrays hold the stated number of values and outputs are writable.
 */
enum BrStatus br_cover_sweep(const struct BrPremeasure *q,
                             const double *targets,
                             size_t n_targets,
                             const double *deltas,
                             size_t n_deltas,
                             double *values,
                             double *limit,
                             bool *all_exact);

/**
 * Packing sweep over the open box `(lo, hi)`. Outputs as for
 * [`br_cover_sweep`].
 *
 * # Safety
 * `lo` and `hi` hold `dim` values, `deltas` and `values` hold `n_deltas`,
 * and outputs are writable.
 */
enum BrStatus br_packing_sweep(const struct BrPremeasure *q,
                               const double *lo,
                               const double *hi,
                               const double *deltas,
                               size_t n_deltas,
                               double *values,
                               double *limit,
                               bool *all_exact);

/**
 * Split `n` balls in `R^dim` into disjoint subfamilies covering every
 * centre. Writes the subfamily count; returns `INFEASIBLE` when more than
 * `2 * zeta + 1` would be needed.
 *
 * # Safety
 * `centers` holds `n * dim` values, `radii` holds `n`, `count` is writable.
 */
enum BrStatus br_besicovitch_subfamilies(const double *centers,
                                         const double *radii,
                                         size_t n,
                                         size_t dim,
                                         size_t zeta,
                                         size_t *count);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BALLRECON_H */
