/* gridopt C API: power-system case handling, Newton-Raphson power flow, and
 * the two-stage series-compensator placement study, behind opaque handles.
 *
 * Every function that can fail returns a gridopt_status; GRIDOPT_OK is 0.
 * On failure, gridopt_last_error() returns a thread-local description. Handles
 * are created by gridopt_* constructors and released by the matching _free.
 * Strings returned as const char* are owned by their handle and live until it
 * is freed; strings returned through char** are released with
 * gridopt_text_free.
 */
#ifndef GRIDOPT_H
#define GRIDOPT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct gridopt_network gridopt_network;
typedef struct gridopt_solution gridopt_solution;
typedef struct gridopt_report gridopt_report;

typedef enum gridopt_status {
    GRIDOPT_OK = 0,
    GRIDOPT_ERROR_IO = 1,         /* file unreadable / unwritable */
    GRIDOPT_ERROR_PARSE = 2,      /* malformed case or config text */
    GRIDOPT_ERROR_VALIDATION = 3, /* network violates an invariant */
    GRIDOPT_ERROR_CONFIG = 4,     /* bad options or parameters */
    GRIDOPT_ERROR_DIVERGED = 5,   /* required convergence not reached */
    GRIDOPT_ERROR_NUMERIC = 6,    /* singular system or similar failure */
    GRIDOPT_ERROR_INTERNAL = 7
} gridopt_status;

const char* gridopt_last_error(void);
const char* gridopt_version(void);

/* --- network ----------------------------------------------------------- */

typedef enum gridopt_case_format {
    GRIDOPT_FORMAT_AUTO = 0, /* JSON if the text starts with '{', else CDF */
    GRIDOPT_FORMAT_CDF = 1,
    GRIDOPT_FORMAT_JSON = 2
} gridopt_case_format;

/* Reads an IEEE Common Data Format or native JSON case file. */
gridopt_status gridopt_network_open(const char* path, gridopt_network** out);
gridopt_status gridopt_network_parse(const char* text, gridopt_case_format format,
                                     gridopt_network** out);
void gridopt_network_free(gridopt_network* net);

int gridopt_network_bus_count(const gridopt_network* net);
int gridopt_network_branch_count(const gridopt_network* net);
int gridopt_network_generator_count(const gridopt_network* net);
double gridopt_network_base_mva(const gridopt_network* net);

/* Native JSON serialization of the case. */
gridopt_status gridopt_network_to_json(const gridopt_network* net, char** out_text);
void gridopt_text_free(char* text);

/* Fills out_report (optional, may be NULL) with one violation per line and
 * returns the violation count, or -1 on failure. */
int gridopt_network_validate(const gridopt_network* net, char** out_report);

/* Attaches per-generator fuel-cost records from a JSON document:
 * {"costs":[{"bus":1,"a":0,"b":2.0,"c":0.00375,
 *            "p_min_mw":50,"p_max_mw":200}, ...]} */
gridopt_status gridopt_network_attach_costs(gridopt_network* net, const char* json_text);
gridopt_status gridopt_network_attach_costs_file(gridopt_network* net, const char* path);

/* Copy with every load multiplied by factor. */
gridopt_status gridopt_network_scale_loads(const gridopt_network* net, double factor,
                                           gridopt_network** out);

/* --- power flow --------------------------------------------------------- */

typedef struct gridopt_pf_options {
    double tolerance;      /* pu mismatch threshold, default 1e-6 */
    int max_iterations;    /* default 30 */
    int flat_start;        /* default 1 */
    int enforce_q_limits;  /* default 1 */
} gridopt_pf_options;

void gridopt_pf_options_init(gridopt_pf_options* options);

/* Solves the case. Non-convergence is data: the call succeeds and the
 * solution reports converged = 0. */
gridopt_status gridopt_solve_power_flow(const gridopt_network* net,
                                        const gridopt_pf_options* options,
                                        gridopt_solution** out);
void gridopt_solution_free(gridopt_solution* sol);

int gridopt_solution_converged(const gridopt_solution* sol);
int gridopt_solution_iterations(const gridopt_solution* sol);
double gridopt_solution_max_mismatch(const gridopt_solution* sol);
double gridopt_solution_loss_mw(const gridopt_solution* sol);
int gridopt_solution_bus_count(const gridopt_solution* sol);
gridopt_status gridopt_solution_bus_state(const gridopt_solution* sol, int index,
                                          int* bus_id, double* v_mag, double* v_angle_rad);

/* --- placement study ----------------------------------------------------- */

/* Runs the full study (base solve, stressed solve, locate, size, optional
 * dispatch re-optimization). config_json may be NULL or "{}" for defaults;
 * recognized fields mirror the documented study configuration schema. */
gridopt_status gridopt_run_study(const gridopt_network* net, const char* config_json,
                                 gridopt_report** out);
void gridopt_report_free(gridopt_report* report);

const char* gridopt_report_json(const gridopt_report* report);
const char* gridopt_report_voltage_csv(const gridopt_report* report);
const char* gridopt_report_summary(const gridopt_report* report);

#ifdef __cplusplus
}
#endif

#endif /* GRIDOPT_H */
