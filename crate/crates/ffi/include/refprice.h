#ifndef REFPRICE_H
#define REFPRICE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RpScheduleKind {
  /**
   * `c`
   */
  RP_SCHEDULE_KIND_CONSTANT = 0,
  /**
   * `c / (t + offset)^eta`
   */
  RP_SCHEDULE_KIND_POWER = 1,
} RpScheduleKind;

typedef enum RpStatus {
  RP_STATUS_OK = 0,
  RP_STATUS_NULL_POINTER = 1,
  RP_STATUS_INVALID_PARAMS = 2,
  RP_STATUS_DOMAIN = 3,
  RP_STATUS_SINGULAR = 4,
  RP_STATUS_OUT_OF_REGIME = 5,
  RP_STATUS_CONFIGURATION = 6,
  RP_STATUS_OVERFLOW = 7,
  RP_STATUS_OUT_OF_RANGE = 8,
  RP_STATUS_PANIC = 9,
} RpStatus;

/**
 * Opaque validated market.
 */
typedef struct RpMarket RpMarket;

/**
 * Opaque simulation result.
 */
typedef struct RpTrajectory RpTrajectory;

/**
 * Market parameters. Set `m` to NaN to derive the margin.
 */
typedef struct RpMarketSpec {
  double alpha[2];
  double beta[2];
  double delta[2];
  double gamma[2];
  double theta[2];
  double a;
  double p_lo;
  double p_hi;
  double m;
} RpMarketSpec;

typedef struct RpSne {
  double p1_star;
  double p2_star;
  double r_star;
  bool interior;
} RpSne;

typedef struct RpSchedule {
  enum RpScheduleKind kind;
  double c;
  double eta;
  double offset;
} RpSchedule;

typedef struct RpPeriod {
  uint64_t t;
  double p1;
  double p2;
  double r;
  double y1;
  double y2;
  double g1;
  double g2;
  double gn;
  double d1;
  double d2;
  double rev1;
  double rev2;
} RpPeriod;

/**
 * Constant-step region. Missing values are NaN.
 */
typedef struct RpConstStep {
  double sigma0;
  double z1;
  double z2;
  double s_tilde;
  double h;
  bool feasible;
  double eps[2];
  double contraction;
} RpConstStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Validates `spec` and returns a new market handle in `*out`.
 *
 * # Safety
 * `spec` must point to a valid `RpMarketSpec` and `out` to writable storage.
 */
enum RpStatus rp_market_new(const struct RpMarketSpec *spec, struct RpMarket **out_market);

/**
 * The worked example market: alpha = (5, 6), beta = (2, 3), delta = (0.4, 0.7),
 * gamma = (0.1, 0.5), theta = (0.8, 0.2), a = 0.4, prices in [1, 2].
 *
 * # Safety
 * `out` must point to writable storage.
 */
enum RpStatus rp_market_example(struct RpMarket **out_market);

/**
 * # Safety
 * `market` must be null or a handle from `rp_market_new`/`rp_market_example`
 * that has not been freed.
 */
void rp_market_free(struct RpMarket *market);

/**
 * Sensitivity margin `m` in effect.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RpStatus rp_market_margin(const struct RpMarket *market, double *out_m);

/**
 * Demand of `firm` (1 or 2) at the profile `(p1, p2, r)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RpStatus rp_demand(const struct RpMarket *market,
                        uint32_t firm_index,
                        double p1,
                        double p2,
                        double r,
                        double *out_demand);

/**
 * Gradient of the negated revenue of `firm` in its own price, at `(p1, p2, r)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RpStatus rp_gradient(const struct RpMarket *market,
                          uint32_t firm_index,
                          double p1,
                          double p2,
                          double r,
                          double *out_gradient);

/**
 * Next reference price.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RpStatus rp_reference_update(const struct RpMarket *market,
                                  double r,
                                  double p1,
                                  double p2,
                                  double *out_r);

/**
 * Closed-form stable equilibrium.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RpStatus rp_sne(const struct RpMarket *market, struct RpSne *out_sne);

/**
 * Best response of `firm` to the rival price and reference price.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RpStatus rp_best_response(const struct RpMarket *market,
                               uint32_t firm_index,
                               double p_other,
                               double r,
                               double *out_price);

/**
 * Largest joint best-response profile at reference price `r`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RpStatus rp_best_response_profile(const struct RpMarket *market,
                                       double r,
                                       double *out_p1,
                                       double *out_p2);

/**
 * Mirror-descent run with quadratic regularizers `scale_i·z²/2`, starting from
 * prices `(p1, p2)` and reference `r`.
 *
 * # Safety
 * `schedules` and `scales` must each point to two elements; other pointers must be valid.
 */
enum RpStatus rp_simulate(const struct RpMarket *market,
                          const struct RpSchedule *schedules,
                          const double *scales,
                          double p1,
                          double p2,
                          double r,
                          size_t horizon,
                          struct RpTrajectory **out_traj);

/**
 * Number of recorded periods; 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t rp_trajectory_len(const struct RpTrajectory *traj);

/**
 * Row `index` (0-based).
 *
 * # Safety
 * Pointers must be valid.
 */
enum RpStatus rp_trajectory_row(const struct RpTrajectory *traj,
                                size_t index,
                                struct RpPeriod *out_row);

/**
 * # Safety
 * `traj` must be null or a handle from `rp_simulate` that has not been freed.
 */
void rp_trajectory_free(struct RpTrajectory *traj);

/**
 * Strong-convexity threshold for margin `m > 2`.
 *
 * # Safety
 * `out` must be valid.
 */
enum RpStatus rp_sigma0(double m, double *out_sigma0);

/**
 * Constant-step region for moduli `(sigma1, sigma2)`. Infeasibility is
 * reported through `feasible`, not the status.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RpStatus rp_const_step_region(const struct RpMarket *market,
                                   double sigma1,
                                   double sigma2,
                                   struct RpConstStep *out_region);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len − 1` bytes) and returns the full message length.
 * Pass a null `buf` to query the length.
 *
 * # Safety
 * `buf` must be null or point to at least `len` writable bytes.
 */
size_t rp_last_error_message(char *buf, size_t len);

/**
 * Static name of a status code.
 */
const char *rp_status_name(enum RpStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REFPRICE_H */
