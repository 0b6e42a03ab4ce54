#ifndef SOLMIN_H
#define SOLMIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a library call. Values match the command-line exit codes.
 */
typedef enum SolminStatus {
  SOLMIN_STATUS_OK = 0,
  SOLMIN_STATUS_IO = 1,
  SOLMIN_STATUS_INVALID_ARGUMENT = 2,
  SOLMIN_STATUS_PARSE = 3,
  SOLMIN_STATUS_DOMAIN = 4,
  SOLMIN_STATUS_NOT_CONVERGED = 5,
  SOLMIN_STATUS_RESIDUAL_GATE = 7,
  SOLMIN_STATUS_NUMERICAL = 8,
  SOLMIN_STATUS_NULL_POINTER = 9,
  SOLMIN_STATUS_PANIC = 10,
} SolminStatus;

typedef enum SolminMetric {
  /**
   * `|dw|^2 / |1 - |w|^4|`
   */
  SOLMIN_METRIC_KOKUBU = 0,
  /**
   * `|dw|^2 / |w^2 - wbar^2|`
   */
  SOLMIN_METRIC_SOL = 1,
} SolminMetric;

/**
 * Opaque Weierstrass data `(f, g)` on a grid.
 */
typedef struct SolminGaussData SolminGaussData;

/**
 * Opaque sampled immersion in group coordinates.
 */
typedef struct SolminImmersion SolminImmersion;

/**
 * Rectangular grid of `n_re x n_im` nodes spanning `[re0, re1] x [im0, im1]`.
 */
typedef struct SolminGrid {
  double re0;
  double im0;
  double re1;
  double im1;
  size_t n_re;
  size_t n_im;
} SolminGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *solmin_status_string(enum SolminStatus status);

/**
 * Message of the last failed call on this thread; valid until the next
 * failing call on the same thread. Empty if nothing failed yet.
 */
const char *solmin_last_error_message(void);

/**
 * Builds Gauss data from row-major arrays (`index = k * n_re + j`) of
 * length `n_re * n_im`.
 */
enum SolminStatus solmin_gauss_new(struct SolminGrid grid,
                                   const double *f_re,
                                   const double *f_im,
                                   const double *g_re,
                                   const double *g_im,
                                   struct SolminGaussData **out);

/**
 * Data of the plane `x2 = const`: `f = i / (mu1 (z + zbar))`, `g = -i`.
 */
enum SolminStatus solmin_gauss_x2_plane(struct SolminGrid grid,
                                        double mu1,
                                        struct SolminGaussData **out);

/**
 * Max-norm residual of the first-order system for `(mu1, mu2)`.
 */
enum SolminStatus solmin_gauss_max_residual(const struct SolminGaussData *data,
                                            double mu1,
                                            double mu2,
                                            double *out);

void solmin_gauss_free(struct SolminGaussData *data);

/**
 * Integrates the data into `G(mu1, mu2)` from the identity at the lower-left
 * node. Data failing the residual gate are refused unless `force` is nonzero.
 */
enum SolminStatus solmin_integrate(const struct SolminGaussData *data,
                                   double mu1,
                                   double mu2,
                                   int32_t force,
                                   struct SolminImmersion **out);

/**
 * Solves for the Gauss map into Sol with the boundary values of `g` (arrays
 * as in [`solmin_gauss_new`]; interior entries are ignored) and integrates
 * the surface. Either output may be null if not wanted.
 */
enum SolminStatus solmin_solve_sol(struct SolminGrid grid,
                                   const double *g_re,
                                   const double *g_im,
                                   size_t max_iters,
                                   double tol,
                                   struct SolminGaussData **out_data,
                                   struct SolminImmersion **out_surface);

enum SolminStatus solmin_immersion_node_count(const struct SolminImmersion *surface, size_t *out);

/**
 * Copies the group coordinates into three arrays of length `len`, which
 * must equal the node count.
 */
enum SolminStatus solmin_immersion_coords(const struct SolminImmersion *surface,
                                          double *x1,
                                          double *x2,
                                          double *x3,
                                          size_t len);

/**
 * Largest `|H|` over interior nodes.
 */
enum SolminStatus solmin_immersion_max_mean_curvature(const struct SolminImmersion *surface,
                                                      double *out);

void solmin_immersion_free(struct SolminImmersion *surface);

/**
 * Conformal factor `lambda^2` of a target metric at `w`.
 */
enum SolminStatus solmin_metric_lambda2(enum SolminMetric kind, double re, double im, double *out);

/**
 * Christoffel symbol `d/dw log lambda^2` of a target metric at `w`.
 */
enum SolminStatus solmin_metric_christoffel(enum SolminMetric kind,
                                            double re,
                                            double im,
                                            double *out_re,
                                            double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOLMIN_H */
