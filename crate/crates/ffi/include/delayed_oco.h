#ifndef DELAYED_OCO_H
#define DELAYED_OCO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DocoStatus {
  DOCO_STATUS_OK = 0,
  DOCO_STATUS_NULL_POINTER = 1,
  DOCO_STATUS_INVALID_INPUT = 2,
  DOCO_STATUS_PARAMETER = 3,
  DOCO_STATUS_SCHEDULE = 4,
  DOCO_STATUS_PROTOCOL = 5,
  DOCO_STATUS_FEEDBACK = 6,
  DOCO_STATUS_NUMERICAL = 7,
  DOCO_STATUS_DOMAIN = 8,
  DOCO_STATUS_STATE_CORRUPTION = 9,
  DOCO_STATUS_IO = 10,
  DOCO_STATUS_PARSE = 11,
  DOCO_STATUS_OUT_OF_RANGE = 12,
  DOCO_STATUS_PANIC = 13,
} DocoStatus;

/*
 Opaque experiment configuration.
 */
typedef struct DocoConfig DocoConfig;

/*
 Opaque regret ledger produced by [`doco_run`].
 */
typedef struct DocoLedger DocoLedger;

/*
 One ledger row.
 */
typedef struct DocoRow {
  size_t t;
  double loss;
  double cum_loss;
  double cum_regret;
} DocoRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. The pointer is
 valid until the next call into this library from the same thread.
 */
const char *doco_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *doco_version(void);

/*
 Creates a configuration with default settings for `algorithm`
 (`ogd_sc`, `dogd`, `dogd_sc`, `bdogd_sc`, `twopoint` or `dbgd`).

 # Safety
 `algorithm` must be a NUL-terminated string; `out` must be writable.
 */
enum DocoStatus doco_config_new(const char *algorithm, struct DocoConfig **out);

/*
 # Safety
 `cfg` must be NULL or a handle from [`doco_config_new`] not yet freed.
 */
void doco_config_free(struct DocoConfig *cfg);

/*
 # Safety
 `cfg` must be a live configuration handle.
 */
enum DocoStatus doco_config_set_horizon(struct DocoConfig *cfg, size_t horizon);

/*
 # Safety
 `cfg` must be a live configuration handle.
 */
enum DocoStatus doco_config_set_dim(struct DocoConfig *cfg, size_t dim);

/*
 Sets the decision radius `R` and the inner radius `r` together.

 # Safety
 `cfg` must be a live configuration handle.
 */
enum DocoStatus doco_config_set_radii(struct DocoConfig *cfg, double radius, double inner_radius);

/*
 # Safety
 `cfg` must be a live configuration handle.
 */
enum DocoStatus doco_config_set_seed(struct DocoConfig *cfg, uint64_t seed);

/*
 Accepts the same syntax as the CLI: `periodic:2,3,2,1`, `constant:d`,
 `unit` or a schedule file path.

 # Safety
 `cfg` must be a live configuration handle; `spec` a NUL-terminated string.
 */
enum DocoStatus doco_config_set_schedule(struct DocoConfig *cfg, const char *spec);

/*
 `ln_t_over_t[:c]`, `inv_t_plus_d` or `fixed:<delta>`.

 # Safety
 `cfg` must be a live configuration handle; `rule` a NUL-terminated string.
 */
enum DocoStatus doco_config_set_delta_rule(struct DocoConfig *cfg, const char *rule);

/*
 Validates the configuration without running it.

 # Safety
 `cfg` must be a live configuration handle.
 */
enum DocoStatus doco_config_validate(const struct DocoConfig *cfg);

/*
 Runs the experiment and stores a new ledger in `out`.

 # Safety
 `cfg` must be a live configuration handle; `out` must be writable.
 */
enum DocoStatus doco_run(const struct DocoConfig *cfg, struct DocoLedger **out);

/*
 # Safety
 `ledger` must be NULL or a handle from [`doco_run`] not yet freed.
 */
void doco_ledger_free(struct DocoLedger *ledger);

/*
 Number of recorded rounds; 0 for NULL.

 # Safety
 `ledger` must be NULL or a live ledger handle.
 */
size_t doco_ledger_len(const struct DocoLedger *ledger);

/*
 Copies row `index` (0-based) into `out`.

 # Safety
 `ledger` must be a live ledger handle; `out` must be writable.
 */
enum DocoStatus doco_ledger_row(const struct DocoLedger *ledger, size_t index, struct DocoRow *out);

/*
 Final cumulative loss, final regret and comparator total.

 # Safety
 `ledger` must be a live ledger handle; each output pointer may be NULL.
 */
enum DocoStatus doco_ledger_totals(const struct DocoLedger *ledger,
                                   double *cum_loss,
                                   double *regret,
                                   double *comparator_total);

/*
 # Safety
 `ledger` must be a live ledger handle; `path` a NUL-terminated string.
 */
enum DocoStatus doco_ledger_write_csv(const struct DocoLedger *ledger, const char *path);

/*
 Euclidean projection of `y[0..n]` onto the ball of `radius`, into `out[0..n]`.

 # Safety
 `y` must hold `n` readable doubles and `out` `n` writable doubles.
 */
enum DocoStatus doco_project_ball(double radius, const double *y, size_t n, double *out);

/*
 (n+1)-point gradient estimate from `values = [f(x), f(x + delta e_1), ...,
 f(x + delta e_n)]` (`n + 1` entries); writes `n` doubles to `out`.

 # Safety
 `values` must hold `n + 1` readable doubles and `out` `n` writable doubles.
 */
enum DocoStatus doco_multipoint_estimate(const double *values, size_t n, double delta, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DELAYED_OCO_H */
