#ifndef NETLUMP_H
#define NETLUMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NlStatus {
  NL_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NL_STATUS_NULL_POINTER = 1,
  /**
   * Arguments violate a documented precondition.
   */
  NL_STATUS_INVALID = 2,
  /**
   * The computation failed (singular system, no convergence, ...).
   */
  NL_STATUS_NUMERICAL = 3,
  /**
   * A Rust panic was caught at the boundary.
   */
  NL_STATUS_PANIC = 4,
} NlStatus;

/**
 * Diffusion boundary coupling `(K00, K01, K10, K11)`.
 */
typedef struct NlCoupling NlCoupling;

/**
 * Recorded times and states of a diffusion solve.
 */
typedef struct NlTrajectory NlTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none.
 * The pointer stays valid until the next failing call on the thread.
 */
const char *nl_last_error_message(void);

/**
 * # Safety
 * Each `k**` points to `m * m` doubles; `out` is writable.
 */
enum NlStatus nl_coupling_new(size_t m,
                              const double *k00,
                              const double *k01,
                              const double *k10,
                              const double *k11,
                              struct NlCoupling **out);

/**
 * # Safety
 * `c` is null or was returned by `nl_coupling_new` and not yet freed.
 */
void nl_coupling_free(struct NlCoupling *c);

/**
 * # Safety
 * `c` is a live handle or null.
 */
size_t nl_coupling_dim(const struct NlCoupling *c);

/**
 * Writes the aggregated matrix `K10 − K00 + K11 − K01` (`m × m`).
 *
 * # Safety
 * `c` is a live handle; `out` holds `m * m` doubles.
 */
enum NlStatus nl_coupling_lumped_matrix(const struct NlCoupling *c, double *out);

/**
 * Structural verdicts: sign pattern for positivity, the Markov row-sum
 * conditions, and the Kolmogorov property of the transpose-form lumped matrix.
 *
 * # Safety
 * `c` is a live handle; the outputs are writable.
 */
enum NlStatus nl_coupling_check(const struct NlCoupling *c,
                                bool *positive,
                                bool *markov,
                                bool *kolmogorov);

/**
 * Solves the diffusion system. `u0` holds `m * (n_cells + 1)` samples.
 * `dt <= 0` picks the default step; `n_times == 0` records 21 uniform times.
 *
 * # Safety
 * Pointers are valid for the stated lengths; `times` may be null when
 * `n_times == 0`.
 */
enum NlStatus nl_diffusion_solve(const struct NlCoupling *c,
                                 double eps,
                                 const double *u0,
                                 size_t n_cells,
                                 double t_final,
                                 double dt,
                                 const double *times,
                                 size_t n_times,
                                 struct NlTrajectory **out);

/**
 * # Safety
 * `t` is null or a live trajectory handle.
 */
void nl_trajectory_free(struct NlTrajectory *t);

/**
 * Number of recorded states (0 for null).
 *
 * # Safety
 * `t` is null or a live trajectory handle.
 */
size_t nl_trajectory_len(const struct NlTrajectory *t);

/**
 * Copies record `k`: its time to `time` and its `len` samples to `out`.
 * `len` must equal `m * (n_cells + 1)`.
 *
 * # Safety
 * `t` is live; `time` is writable; `out` holds `len` doubles.
 */
enum NlStatus nl_trajectory_get(const struct NlTrajectory *t,
                                size_t k,
                                double *time,
                                double *out,
                                size_t len);

/**
 * Exact transport solution at time `t` for `u_t = −u_x/ε`,
 * `u(0) = (I + εB)u(1)`, initial data linearly interpolated from `u0`.
 *
 * # Safety
 * `b` holds `m * m` doubles; `u0` and `out` hold `m * (n_cells + 1)`.
 */
enum NlStatus nl_transport_exact(size_t m,
                                 const double *b,
                                 double eps,
                                 const double *u0,
                                 size_t n_cells,
                                 double t,
                                 double *out);

/**
 * Lumped limit `v̄(t) = e^{tK} v0` for the diffusion coupling.
 *
 * # Safety
 * `c` is live; `v0` and `out` hold `m` doubles.
 */
enum NlStatus nl_aggregated_solution(const struct NlCoupling *c,
                                     const double *v0,
                                     double t,
                                     double *out);

/**
 * Perron vector (sum 1) of a nonnegative, column-stochastic, irreducible matrix.
 *
 * # Safety
 * `t` holds `m * m` doubles; `out` holds `m`.
 */
enum NlStatus nl_perron_vector(size_t m, const double *t, double *out);

/**
 * Least-squares order of `error ~ ε^p` over strictly decreasing `eps`.
 * With fewer than three points or a non-positive error, `order` is NaN and
 * `pass` false (status OK).
 *
 * # Safety
 * `eps` and `errors` hold `n` doubles; `order` and `pass` are writable.
 */
enum NlStatus nl_estimate_order(const double *eps,
                                const double *errors,
                                size_t n,
                                double band_lo,
                                double band_hi,
                                double *order,
                                bool *pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETLUMP_H */
