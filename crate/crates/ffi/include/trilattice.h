#ifndef TRILATTICE_H
#define TRILATTICE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum TlMode {
  TL_MODE_PAPER = 0,
  TL_MODE_ADAPTIVE = 1,
} TlMode;

/*
 Result code of every fallible call.
 */
typedef enum TlStatus {
  TL_STATUS_OK = 0,
  TL_STATUS_INVALID_ARGUMENT = 1,
  TL_STATUS_NULL_POINTER = 2,
  /*
   The quotient is undetermined this close to the triangular lattice.
   */
  TL_STATUS_NEAR_TRIANGULAR = 3,
  TL_STATUS_TOLERANCE_UNREACHABLE = 4,
  TL_STATUS_INTERNAL = 5,
  TL_STATUS_PANIC = 6,
} TlStatus;

/*
 Certification settings. Create with `tl_certifier_new`.
 */
typedef struct TlCertifier TlCertifier;

/*
 Finished certification report. Produced by `tl_certifier_run`.
 */
typedef struct TlReport TlReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or an empty string. The
 pointer stays valid until the next failing call on the same thread.
 */
const char *tl_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *tl_version(void);

/*
 `Q_L(m, n) = (m + x n)^2 / y + y n^2`.

 # Safety
 `out` must be valid for writes.
 */
enum TlStatus tl_quadratic_form(double x, double y, int64_t m, int64_t n, double *out);

/*
 Epstein zeta value of the unit-covolume lattice `(x, y)` with radius at most `tol`.

 # Safety
 `mid` and `rad` must be valid for writes.
 */
enum TlStatus tl_epstein_certified(double x,
                                   double y,
                                   double s,
                                   double tol,
                                   double *mid,
                                   double *rad);

/*
 Riemann zeta value `zeta(s)`, `s > 1`, with radius at most `tol`.

 # Safety
 `mid` and `rad` must be valid for writes.
 */
enum TlStatus tl_riemann_certified(double s, double tol, double *mid, double *rad);

/*
 Threshold height above which the quotient exceeds `alpha / beta`:
 `y_bar` rounded up to `k` decimals, and the unrounded upper bound `y_exact`.

 # Safety
 `y_bar` and `y_exact` must be valid for writes.
 */
enum TlStatus tl_threshold(double alpha, double beta, uint32_t k, double *y_bar, double *y_exact);

/*
 Literal global Lipschitz formula at height `y_bar` and truncation `n`.

 # Safety
 `out` must be valid for writes.
 */
enum TlStatus tl_global_lipschitz(double alpha, double beta, double y_bar, uint32_t n, double *out);

/*
 Enclosure of `(zeta_L(alpha) - zeta_A2(alpha)) / (zeta_L(beta) - zeta_A2(beta))`.

 # Safety
 `mid` and `rad` must be valid for writes.
 */
enum TlStatus tl_quotient(double x,
                          double y,
                          double alpha,
                          double beta,
                          double tol,
                          double *mid,
                          double *rad);

/*
 Energy `a V^{-alpha/2} zeta_L(alpha) - b V^{-beta/2} zeta_L(beta)`.

 # Safety
 `out` must be valid for writes.
 */
enum TlStatus tl_lj_energy(double x,
                           double y,
                           double volume,
                           double alpha,
                           double beta,
                           double a,
                           double b,
                           double tol,
                           double *out);

/*
 Covolume minimising the energy of the shape `(x, y)`.

 # Safety
 `out` must be valid for writes.
 */
enum TlStatus tl_optimal_volume(double x,
                                double y,
                                double alpha,
                                double beta,
                                double a,
                                double b,
                                double tol,
                                double *out);

/*
 Energy of the shape `(x, y)` at its optimal covolume.

 # Safety
 `out` must be valid for writes.
 */
enum TlStatus tl_min_dilated_energy(double x,
                                    double y,
                                    double alpha,
                                    double beta,
                                    double a,
                                    double b,
                                    double tol,
                                    double *out);

/*
 New certifier for `(alpha, beta)` in adaptive mode with default settings.

 # Safety
 `out` must be valid for writes. The handle written there must be released
 with `tl_certifier_free`.
 */
enum TlStatus tl_certifier_new(double alpha, double beta, struct TlCertifier **out);

/*
 # Safety
 `c` must be a live handle from `tl_certifier_new`.
 */
enum TlStatus tl_certifier_set_mode(struct TlCertifier *c, enum TlMode mode);

/*
 Grid spacing; must be a decimal fraction dividing 1/2.

 # Safety
 `c` must be a live handle from `tl_certifier_new`.
 */
enum TlStatus tl_certifier_set_delta(struct TlCertifier *c, double delta);

/*
 Fixed truncation order for paper mode.

 # Safety
 `c` must be a live handle from `tl_certifier_new`.
 */
enum TlStatus tl_certifier_set_truncation(struct TlCertifier *c, uint32_t n);

/*
 Global Lipschitz constant for paper mode.

 # Safety
 `c` must be a live handle from `tl_certifier_new`.
 */
enum TlStatus tl_certifier_set_lipschitz(struct TlCertifier *c, double m);

/*
 Zeta tolerance for adaptive mode.

 # Safety
 `c` must be a live handle from `tl_certifier_new`.
 */
enum TlStatus tl_certifier_set_tolerance(struct TlCertifier *c, double tol);

/*
 Radius of the sampled ball around the triangular lattice.

 # Safety
 `c` must be a live handle from `tl_certifier_new`.
 */
enum TlStatus tl_certifier_set_epsilon(struct TlCertifier *c, double epsilon);

/*
 # Safety
 `c` must be a live handle from `tl_certifier_new`.
 */
enum TlStatus tl_certifier_set_max_depth(struct TlCertifier *c, uint32_t depth);

/*
 Replaces `alpha / beta` as the bound the quotient must exceed.

 # Safety
 `c` must be a live handle from `tl_certifier_new`.
 */
enum TlStatus tl_certifier_set_margin(struct TlCertifier *c, double margin);

/*
 Worker threads; 0 restores the default (environment, then machine parallelism).

 # Safety
 `c` must be a live handle from `tl_certifier_new`.
 */
enum TlStatus tl_certifier_set_workers(struct TlCertifier *c, uint32_t workers);

/*
 Runs the certification. A false verdict is not an error: inspect it with
 `tl_report_verdict`.

 # Safety
 `c` must be a live handle from `tl_certifier_new` and `out` valid for
 writes. The report must be released with `tl_report_free`.
 */
enum TlStatus tl_certifier_run(const struct TlCertifier *c, struct TlReport **out);

/*
 # Safety
 `c` must be null or a handle from `tl_certifier_new` not yet freed.
 */
void tl_certifier_free(struct TlCertifier *c);

/*
 # Safety
 `r` must be a live report and `out` valid for writes.
 */
enum TlStatus tl_report_verdict(const struct TlReport *r, bool *out);

/*
 Smallest quotient enclosure recorded by the run, at `(x, y)`.

 # Safety
 `r` must be a live report; the out-pointers must be valid for writes.
 */
enum TlStatus tl_report_min_q(const struct TlReport *r,
                              double *mid,
                              double *rad,
                              double *x,
                              double *y);

/*
 JSON report, owned by `r` and valid until `tl_report_free`.

 # Safety
 `r` must be null or a live report.
 */
const char *tl_report_json(const struct TlReport *r);

/*
 # Safety
 `r` must be null or a report from `tl_certifier_run` not yet freed.
 */
void tl_report_free(struct TlReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRILATTICE_H */
