#ifndef RECIRC_H
#define RECIRC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Values 1 to 8 match the CLI exit codes.
 */
typedef enum {
  RECIRC_STATUS_OK = 0,
  RECIRC_STATUS_OTHER = 1,
  /**
   * A null pointer, non-UTF-8 string or unknown name was passed.
   */
  RECIRC_STATUS_INVALID_ARGUMENT = 2,
  RECIRC_STATUS_IO = 3,
  RECIRC_STATUS_PARSE = 4,
  RECIRC_STATUS_VALIDATION = 5,
  RECIRC_STATUS_STAGE = 6,
  RECIRC_STATUS_MISMATCH = 7,
  RECIRC_STATUS_MISSING_METRIC = 8,
  RECIRC_STATUS_PANIC = 9,
} RecircStatus;

typedef enum {
  RECIRC_MODE_BASELINE = 0,
  RECIRC_MODE_FRAMEWORK = 1,
} RecircMode;

/**
 * The output of one pipeline run, with the scenario it ran.
 */
typedef struct RecircRun RecircRun;

/**
 * A parsed, validated scenario.
 */
typedef struct RecircScenario RecircScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *recirc_version(void);

/**
 * Message of the most recent failure on this thread, or null if none.
 * Valid until the next failing call on the same thread.
 */
const char *recirc_last_error(void);

/**
 * Releases a string returned through an `out_json` or `out_path` parameter.
 * Null is ignored.
 */
void recirc_string_free(char *s);

/**
 * Parses and validates a scenario document.
 */
RecircStatus recirc_scenario_from_json(const char *json, RecircScenario **out);

/**
 * Reads, parses and validates a scenario file.
 */
RecircStatus recirc_scenario_load(const char *path, RecircScenario **out);

/**
 * One of the bundled fixtures: `battery_baseline`, `battery_framework`,
 * `waste_baseline`, `waste_framework` or `alloc_small`.
 */
RecircStatus recirc_scenario_fixture(const char *name, RecircScenario **out);

/**
 * Writes the canonical JSON of a scenario.
 */
RecircStatus recirc_scenario_to_json(const RecircScenario *s, char **out_json);

void recirc_scenario_free(RecircScenario *s);

/**
 * Checks a scenario document without keeping it. Writes a JSON array of
 * `{"path", "message"}` findings, empty when the scenario is valid. A
 * malformed document fails with [`RecircStatus::Parse`].
 */
RecircStatus recirc_validate_json(const char *json, char **out_json);

/**
 * Runs the pipeline. When `use_seed` is false the scenario's own seed is
 * used and `seed` is ignored.
 */
RecircStatus recirc_run(const RecircScenario *s,
                        RecircMode mode,
                        bool use_seed,
                        uint64_t seed,
                        RecircRun **out);

void recirc_run_free(RecircRun *r);

/**
 * Writes the run result as JSON.
 */
RecircStatus recirc_run_result_json(const RecircRun *r, char **out_json);

/**
 * Reads one flat metric, e.g. `co2_kg`, `average_recovery` or
 * `recovery.cobalt`. Fails with [`RecircStatus::MissingMetric`] when the run
 * does not carry it.
 */
RecircStatus recirc_run_metric(const RecircRun *r, const char *key, double *out_value);

/**
 * Writes the run's artifacts under `out_dir` and returns the manifest path.
 */
RecircStatus recirc_run_persist(const RecircRun *r, const char *out_dir, char **out_path);

/**
 * Compares a baseline run with a framework run and writes the improvement
 * report as JSON.
 */
RecircStatus recirc_compare(const RecircRun *baseline, const RecircRun *framework, char **out_json);

/**
 * Solves a linear program given as JSON (the `lp.json` run artifact format)
 * with default solver options and writes the solution as JSON.
 */
RecircStatus recirc_solve_milp(const char *lp_json, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RECIRC_H */
