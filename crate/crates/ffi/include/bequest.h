#ifndef BEQUEST_H
#define BEQUEST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BqRegion {
  BQ_REGION_CONTINUE = 0,
  BQ_REGION_STOP = 1,
} BqRegion;

typedef enum BqStatus {
  BQ_STATUS_OK = 0,
  BQ_STATUS_NULL_POINTER = 1,
  BQ_STATUS_INVALID_PARAMS = 2,
  BQ_STATUS_DOMAIN = 3,
  BQ_STATUS_SOLVER = 4,
  BQ_STATUS_UNSUPPORTED = 5,
  BQ_STATUS_PANIC = 6,
} BqStatus;

/**
 * Opaque model handle.
 */
typedef struct BqModel BqModel;

/**
 * Model parameters; field names follow the configuration keys.
 */
typedef struct BqParams {
  double mu;
  double sigma;
  double r;
  double rho;
  double gamma;
  double mu_y;
  double sigma_y;
  double l;
  double m;
  double bequest_b;
  double earmark_q;
  double gompertz_a;
  double x0;
  double y0;
} BqParams;

/**
 * Feedback decision at (x, y).
 */
typedef struct BqPolicy {
  enum BqRegion region;
  double consumption;
  /**
   * Amount held in the risky asset.
   */
  double investment;
  double z_star;
  double bequest;
} BqPolicy;

/**
 * Earmarked case with the bequest chosen at purchase.
 */
typedef struct BqEarmarked {
  double b_tilde;
  double l_bar;
  /**
   * 1 when every verification condition holds.
   */
  int32_t conditions_ok;
} BqEarmarked;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Writes the baseline calibration to `out`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum BqStatus bq_params_baseline(struct BqParams *out);

/**
 * Validates `params` and creates a model handle in `*out`.
 *
 * # Safety
 * `params` must be null or point to a valid `BqParams`; `out` must be null
 * or valid for writes.
 */
enum BqStatus bq_model_new(const struct BqParams *params, struct BqModel **out);

/**
 * Releases a handle from [`bq_model_new`]. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void bq_model_free(struct BqModel *model);

/**
 * Dual purchase boundary b and coefficient C₁ for the fixed bequest.
 * Returns `BQ_STATUS_UNSUPPORTED` when purchase is immediate.
 *
 * # Safety
 * `model` must be a live handle; `b` and `c1` must be valid for writes.
 */
enum BqStatus bq_predetermined_boundary(const struct BqModel *model, double *b, double *c1);

/**
 * Wealth level b̂(y) at which the fixed bequest is bought.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for writes.
 */
enum BqStatus bq_predetermined_wealth_boundary(const struct BqModel *model, double y, double *out);

/**
 * Value V(x, y) with the fixed bequest.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for writes.
 */
enum BqStatus bq_predetermined_value(const struct BqModel *model, double x, double y, double *out);

/**
 * Optimal policy at (x, y) with the fixed bequest.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for writes.
 */
enum BqStatus bq_predetermined_policy(const struct BqModel *model,
                                      double x,
                                      double y,
                                      struct BqPolicy *out);

/**
 * Value V^B(x, y) when the bequest is chosen at purchase.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for writes.
 */
enum BqStatus bq_controlled_value(const struct BqModel *model, double x, double y, double *out);

/**
 * Optimal policy at (x, y) when the bequest is chosen at purchase.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for writes.
 */
enum BqStatus bq_controlled_policy(const struct BqModel *model,
                                   double x,
                                   double y,
                                   struct BqPolicy *out);

/**
 * Dual boundary b̄ for fixed bequest `bequest` on top of earmark `q`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for writes.
 */
enum BqStatus bq_earmarked_boundary(const struct BqModel *model,
                                    double q,
                                    double bequest,
                                    double *out);

/**
 * Pasting points for earmark `q` with the bequest chosen at purchase.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for writes.
 */
enum BqStatus bq_earmarked_controlled(const struct BqModel *model,
                                      double q,
                                      struct BqEarmarked *out);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns its full length in bytes.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes of writes.
 */
size_t bq_last_error(char *buf, size_t len);

/**
 * Static description of a status code.
 */
const char *bq_status_message(enum BqStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEQUEST_H */
