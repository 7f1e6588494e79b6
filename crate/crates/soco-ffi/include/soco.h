/* C interface to the smoothed online convex optimization lab. */

#ifndef SOCO_H
#define SOCO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum SocoStatus {
  SOCO_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SOCO_NULL_ARGUMENT = 1,
  /**
   * The config string was not valid UTF-8.
   */
  SOCO_INVALID_UTF8 = 2,
  /**
   * The config failed to parse or validate.
   */
  SOCO_BAD_CONFIG = 3,
  /**
   * The experiment itself failed.
   */
  SOCO_RUNTIME_ERROR = 4,
  /**
   * A panic was caught at the boundary.
   */
  SOCO_INTERNAL_ERROR = 5,
} SocoStatus;

/**
 * Opaque experiment result. Read it with `soco_report_json`, release it
 * with `soco_report_free`.
 */
typedef struct SocoReport SocoReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. Valid until the next
 * failing call on the same thread; never null.
 */
const char *soco_last_error_message(void);

/**
 * Runs the experiment described by `config_json` (NUL-terminated UTF-8,
 * same schema as the CLI config file plus a `"cmd"` field) and stores a
 * new report in `*out` on success.
 */
enum SocoStatus soco_run_experiment(const char *config_json, struct SocoReport **out);

/**
 * Pretty-printed JSON body of the report. Owned by the handle; valid until
 * `soco_report_free`. Null only if `report` is null.
 */
const char *soco_report_json(const struct SocoReport *report);

/**
 * Competitive ratio of the run, or NaN when the report has none (for
 * example a pure regret experiment).
 */
double soco_report_ratio(const struct SocoReport *report);

/**
 * Releases a report. Passing null is a no-op.
 */
void soco_report_free(struct SocoReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOCO_H */
