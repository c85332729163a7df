/* C interface of the flow / heat-kernel laboratory.
 *
 * All entry points return rhf_status; on failure the thread-local message and
 * stable error name are available via rhf_last_error / rhf_last_error_name.
 * Objects are opaque and single-owner; every *_free accepts NULL.
 */
#ifndef RHFLOW_RHFLOW_H
#define RHFLOW_RHFLOW_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rhf_status {
  RHF_OK = 0,
  RHF_E_CONFIG = 1,  /* bad usage, unreadable or invalid configuration */
  RHF_E_VERIFY = 2,  /* pipeline ran but a verified bound failed */
  RHF_E_NUMERIC = 3, /* solver, quadrature or eigensolve failure */
  RHF_E_IO = 4       /* file could not be read or written */
} rhf_status;

typedef struct rhf_config rhf_config;
typedef struct rhf_trajectory rhf_trajectory;
typedef struct rhf_kernel rhf_kernel;
typedef struct rhf_sobolev rhf_sobolev;
typedef struct rhf_report rhf_report;

/* thread-local description of the most recent failure */
const char* rhf_last_error(void);
/* stable identifier, e.g. BAD_TIME_ORDER or QUADRATURE_FAILED */
const char* rhf_last_error_name(void);
/* process exit convention: 0 ok, 2 usage/config, 3 verification, 4 numerical */
int rhf_exit_code(rhf_status s);

void rhf_set_thread_cap(int threads);

rhf_status rhf_config_load(const char* path, rhf_config** out);
rhf_status rhf_config_parse(const char* json_text, rhf_config** out);
void rhf_config_free(rhf_config* cfg);

rhf_status rhf_flow_run(const rhf_config* cfg, rhf_trajectory** out);
void rhf_trajectory_free(rhf_trajectory* traj);
double rhf_trajectory_t_end(const rhf_trajectory* traj);
int rhf_trajectory_checkpoints(const rhf_trajectory* traj);
rhf_status rhf_trajectory_checkpoint(const rhf_trajectory* traj, int i, double* time,
                                     double* min_s, double* max_s, double* volume);

/* forward + conjugate solve about the source node; writes the field export */
rhf_status rhf_kernel_query(const rhf_config* cfg, const rhf_trajectory* traj,
                            const int source[3], double s, double t, rhf_kernel** out);
void rhf_kernel_free(rhf_kernel* k);
rhf_status rhf_kernel_diagnostics(const rhf_kernel* k, double* g_value, double* j_t,
                                  double* jtilde_s, double* p_mid, double* q_mid,
                                  double* semigroup_residual);
int rhf_kernel_oracle_checked(const rhf_kernel* k);
double rhf_kernel_oracle_linf_rel(const rhf_kernel* k);

/* probe estimation of the inequality constants; times may be NULL to use the
 * configured (or default uniform) slices */
rhf_status rhf_sobolev_estimate(const rhf_config* cfg, const rhf_trajectory* traj,
                                const double* times, int n_times, rhf_sobolev** out);
void rhf_sobolev_free(rhf_sobolev* s);
int rhf_sobolev_size(const rhf_sobolev* s);
rhf_status rhf_sobolev_row(const rhf_sobolev* s, int i, double* t, double* a, double* b,
                           double* lambda0);
int rhf_sobolev_positive_case(const rhf_sobolev* s);
double rhf_sobolev_talenti(const rhf_sobolev* s);

/* full bound verification over the configured samples; returns RHF_OK even
 * when samples fail (query rhf_report_all_pass) */
rhf_status rhf_verify_run(const rhf_config* cfg, const rhf_trajectory* traj, rhf_report** out);
void rhf_report_free(rhf_report* r);
int rhf_report_all_pass(const rhf_report* r);
int rhf_report_rows(const rhf_report* r);
rhf_status rhf_report_row(const rhf_report* r, int i, double* s, double* t, double* g_actual,
                          double* bound_theorem, double* ratio_theorem, int* pass);

/* Command wrappers: load config, run, write artifacts into the configured
 * output directory, and return printable text (free with rhf_string_free).
 * rhf_cmd_verify and rhf_cmd_report return RHF_E_VERIFY when a bound fails;
 * the text still lists every sample and the failing ones. */
rhf_status rhf_cmd_run_flow(const char* config_path, char** out_text);
rhf_status rhf_cmd_kernel(const char* config_path, const int source[3], double s, double t,
                          char** out_text);
rhf_status rhf_cmd_estimate_sobolev(const char* config_path, const double* times, int n_times,
                                    char** out_text);
rhf_status rhf_cmd_verify(const char* config_path, char** out_text);
rhf_status rhf_cmd_report(const char* config_path, char** out_text);
void rhf_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* RHFLOW_RHFLOW_H */
