/* C interface to the capra toolkit. Generated by cbindgen. */

#ifndef CAPRA_H
#define CAPRA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every FFI call.
 */
typedef enum CapraStatus {
  Ok = 0,
  NullPointer = 1,
  InvalidArgument = 2,
  DimensionMismatch = 3,
  SolverFailure = 4,
  InternalPanic = 5,
} CapraStatus;

/**
 * Which case of the subdifferential formula applied.
 */
typedef enum CapraSubdiffCase {
  AtZero = 0,
  NonzeroFinite = 1,
  NonzeroInfiniteAll = 2,
  NonzeroEmpty = 3,
} CapraSubdiffCase;

/**
 * Opaque evaluation context: source norm, solver settings, last error.
 */
typedef struct CapraContext CapraContext;

/**
 * Subdifferential membership evidence (fixed-size part).
 */
typedef struct CapraSubdiffCertificate {
  bool member;
  enum CapraSubdiffCase case_tag;
  double residual_coupling_eq;
  double residual_argmax;
} CapraSubdiffCertificate;

/**
 * Ratio lower-bound report for l0.
 */
typedef struct CapraBoundReport {
  double phi_norm_value;
  double source_norm_value;
  double ratio;
  double phi_at_l0;
  double slack;
  /**
   * Certified integer lower bound on l0, or -1 when phi is not
   * strictly increasing.
   */
  int64_t integer_bound;
} CapraBoundReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a context for the lp source norm; `p` may be `INFINITY`.
 * Returns NULL when `p < 1` or NaN.
 */
struct CapraContext *capra_context_new(double p);

/**
 * Frees a context created by `capra_context_new`. NULL is ignored.
 *
 * # Safety
 * `ctx` must be NULL or a pointer returned by `capra_context_new` that
 * has not been freed yet.
 */
void capra_context_free(struct CapraContext *ctx);

/**
 * Last error message for this context, or NULL; owned by the context
 * and valid until the next failing call.
 *
 * # Safety
 * `ctx` must be a live context pointer.
 */
const char *capra_last_error(const struct CapraContext *ctx);

/**
 * Sets the solver tolerance.
 *
 * # Safety
 * `ctx` must be a live context pointer.
 */
enum CapraStatus capra_context_set_tolerance(struct CapraContext *ctx, double tol);

/**
 * Sets the solver iteration budget.
 *
 * # Safety
 * `ctx` must be a live context pointer.
 */
enum CapraStatus capra_context_set_max_iters(struct CapraContext *ctx, uintptr_t max_iters);

/**
 * Sets the solver seed.
 *
 * # Safety
 * `ctx` must be a live context pointer.
 */
enum CapraStatus capra_context_set_seed(struct CapraContext *ctx, uint64_t seed);

/**
 * Number of entries of `x` with magnitude above `tol`.
 *
 * # Safety
 * `x` must point to `dim` doubles; `out` must be a valid destination.
 */
enum CapraStatus capra_l0(struct CapraContext *ctx,
                          const double *x,
                          uintptr_t dim,
                          double tol,
                          uintptr_t *out);

/**
 * Source norm of `x`.
 *
 * # Safety
 * `x` must point to `dim` doubles; `out` must be a valid destination.
 */
enum CapraStatus capra_source_norm(struct CapraContext *ctx,
                                   const double *x,
                                   uintptr_t dim,
                                   double *out);

/**
 * Dual norm of `y`.
 *
 * # Safety
 * `y` must point to `dim` doubles; `out` must be a valid destination.
 */
enum CapraStatus capra_dual_norm(struct CapraContext *ctx,
                                 const double *y,
                                 uintptr_t dim,
                                 double *out);

/**
 * Coordinate-k norm of `x` (1 <= k <= dim).
 *
 * # Safety
 * `x` must point to `dim` doubles; `out` must be a valid destination.
 */
enum CapraStatus capra_coordinate_norm(struct CapraContext *ctx,
                                       const double *x,
                                       uintptr_t dim,
                                       uintptr_t k,
                                       double *out);

/**
 * Dual coordinate-k norm of `y` (0 <= k <= dim; k = 0 gives 0).
 *
 * # Safety
 * `y` must point to `dim` doubles; `out` must be a valid destination.
 */
enum CapraStatus capra_dual_coordinate_norm(struct CapraContext *ctx,
                                            const double *y,
                                            uintptr_t dim,
                                            uintptr_t k,
                                            double *out);

/**
 * Fills `values_out` and `dual_values_out` (both of length `dim`) with
 * the coordinate-k and dual coordinate-k norm sequences of `x`.
 *
 * # Safety
 * `x` must point to `dim` doubles; both outputs must hold `dim` doubles.
 */
enum CapraStatus capra_norm_sequence(struct CapraContext *ctx,
                                     const double *x,
                                     uintptr_t dim,
                                     double *values_out,
                                     double *dual_values_out);

/**
 * Smallest k whose coordinate-k norm equals the source norm of `x`
 * within relative `tol`; equals l0(x) for strictly convex sources.
 *
 * # Safety
 * `x` must point to `dim` doubles; `out` must be a valid destination.
 */
enum CapraStatus capra_sparsity_from_grading(struct CapraContext *ctx,
                                             const double *x,
                                             uintptr_t dim,
                                             double tol,
                                             uintptr_t *out);

/**
 * Conjugate of `phi(l0(.))` at `y`; `phi` holds `dim + 1` doubles with
 * IEEE infinities allowed. The result uses IEEE infinities as well.
 *
 * # Safety
 * `phi` must point to `dim + 1` doubles, `y` to `dim`; `out` must be a
 * valid destination.
 */
enum CapraStatus capra_conjugate(struct CapraContext *ctx,
                                 const double *phi,
                                 const double *y,
                                 uintptr_t dim,
                                 double *out);

/**
 * Biconjugate of `phi(l0(.))` at `x`. `value_out` uses IEEE infinities;
 * `variational_out` and `gap_out` are NaN when the decomposition route
 * does not apply.
 *
 * # Safety
 * `phi` must point to `dim + 1` doubles, `x` to `dim`; outputs must be
 * valid destinations.
 */
enum CapraStatus capra_biconjugate(struct CapraContext *ctx,
                                   const double *phi,
                                   const double *x,
                                   uintptr_t dim,
                                   double *value_out,
                                   double *variational_out,
                                   double *gap_out);

/**
 * Biconjugate of the level-set indicator `delta_{l0 <= k}` at `x`:
 * 0 or IEEE `+inf`.
 *
 * # Safety
 * `x` must point to `dim` doubles; `out` must be a valid destination.
 */
enum CapraStatus capra_biconjugate_levelset(struct CapraContext *ctx,
                                            uintptr_t k,
                                            const double *x,
                                            uintptr_t dim,
                                            double tol,
                                            double *out);

/**
 * Subdifferential membership: pass `x = NULL` to test at the origin.
 *
 * # Safety
 * `phi` must point to `dim + 1` doubles, `y` (and `x` when non-NULL) to
 * `dim`; `cert_out` must be a valid destination.
 */
enum CapraStatus capra_subdiff_membership(struct CapraContext *ctx,
                                          const double *phi,
                                          const double *x,
                                          const double *y,
                                          uintptr_t dim,
                                          double tol,
                                          struct CapraSubdiffCertificate *cert_out);

/**
 * Phi-norm of `x` (phi finite positive with phi(0) = 0).
 *
 * # Safety
 * `phi` must point to `dim + 1` doubles, `x` to `dim`; `out` must be a
 * valid destination.
 */
enum CapraStatus capra_phi_norm(struct CapraContext *ctx,
                                const double *phi,
                                const double *x,
                                uintptr_t dim,
                                double *out);

/**
 * Dual phi-norm of `y`.
 *
 * # Safety
 * `phi` must point to `dim + 1` doubles, `y` to `dim`; `out` must be a
 * valid destination.
 */
enum CapraStatus capra_dual_phi_norm(struct CapraContext *ctx,
                                     const double *phi,
                                     const double *y,
                                     uintptr_t dim,
                                     double *out);

/**
 * Ratio lower bound on l0(x); see `CapraBoundReport`.
 *
 * # Safety
 * `phi` must point to `dim + 1` doubles, `x` to `dim`; `report_out`
 * must be a valid destination.
 */
enum CapraStatus capra_l0_lower_bound(struct CapraContext *ctx,
                                      const double *phi,
                                      const double *x,
                                      uintptr_t dim,
                                      struct CapraBoundReport *report_out);

/**
 * Hoelder ratio bound `(||x||_1 / ||x||_p)^q`, a lower bound on l0(x);
 * requires p > 1.
 *
 * # Safety
 * `x` must point to `dim` doubles; `out` must be a valid destination.
 */
enum CapraStatus capra_holder_ratio_bound(struct CapraContext *ctx,
                                          const double *x,
                                          uintptr_t dim,
                                          double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CAPRA_H */
