/* C API of the strong-minima certification library.
 *
 * All payloads cross the boundary as JSON strings; matrices are nested arrays
 * of rows, indices are 0-based. Functions return SM_OK on success; on failure
 * they return a status code and sm_last_error() carries a message (thread
 * local, valid until the next API call on the same thread). Strings returned
 * through out-parameters are heap-allocated and must be released with
 * sm_string_free().
 */
#ifndef STRONGMIN_H
#define STRONGMIN_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sm_status {
  SM_OK = 0,
  SM_ERR_INVALID_ARGUMENT = 1,
  SM_ERR_PARSE = 2,
  SM_ERR_INFEASIBLE = 3,
  SM_ERR_NUMERICAL = 4,
  SM_ERR_CONTRACT = 5,
  SM_ERR_DEGENERATE = 6,
  SM_ERR_ASSERTION = 7,
  SM_ERR_IO = 8,
  SM_ERR_INTERNAL = 9
} sm_status;

/* Opaque parsed problem instance (operator, x0, m0, optional mu). */
typedef struct sm_instance sm_instance;

const char* sm_version(void);
const char* sm_last_error(void);
void sm_string_free(char* s);

/* instance_json: {"operator": {...}, "x0": [[...]], "m0": [...], "mu"?: num} */
sm_status sm_instance_parse_json(const char* instance_json, sm_instance** out);
void sm_instance_free(sm_instance* inst);

/* options_json may be NULL; {"thresholds"?: {...}, "solver"?: {...},
 * "retry_certificates"?: bool}. Writes the certificate report as JSON. */
sm_status sm_instance_certify(const sm_instance* inst, const char* options_json,
                              char** report_json);

/* Solves the instance: the equality-constrained problem, or the regularized
 * one when "mu" is present. */
sm_status sm_instance_solve(const sm_instance* inst, const char* options_json,
                            char** result_json);

/* config_json follows the experiment-config schema; ensemble_override may be
 * NULL, "gaussian" or "completion". Writes the CSV body and the JSON summary. */
sm_status sm_experiment_run(const char* config_json, const char* ensemble_override,
                            char** csv_out, char** summary_json_out);

/* Scenario drivers; status SM_ERR_ASSERTION when a certified property fails. */
sm_status sm_demo_minimal(int n, int r, unsigned long long seed,
                          char** report_json);
sm_status sm_demo_lrr(int q, int n1, int n2, int r, unsigned long long seed,
                      char** report_json);

/* Runs the built-in golden instances; writes
 * [{"name":..., "pass":..., "details":...}, ...]. */
sm_status sm_fixtures_run(char** results_json);

#ifdef __cplusplus
}
#endif

#endif /* STRONGMIN_H */
