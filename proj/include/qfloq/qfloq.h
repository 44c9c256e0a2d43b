/* C API for the Floquet spin-1 simulation library.
 *
 * Every entry point reports failures through a status code and, where a
 * buffer is supplied, a human-readable message.  Status values double as the
 * CLI exit codes, except QFLOQ_CHI_CAP which marks a flagged stop (the run
 * ended early because the bond dimension hit its cap; results up to the stop
 * are valid and the condition is recorded in the manifest).
 */
#ifndef QFLOQ_H
#define QFLOQ_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  QFLOQ_OK = 0,
  QFLOQ_CONFIG_ERROR = 2,
  QFLOQ_VERIFY_ERROR = 3,
  QFLOQ_ENGINE_ERROR = 4,
  QFLOQ_CHI_CAP = 5
} qfloq_status;

const char* qfloq_version(void);

/* ---- batch commands -----------------------------------------------------
 * config_json: JSON object of run parameters (NULL or "" uses defaults;
 * unknown keys are rejected naming the nearest valid key).  outdir receives
 * CSV datasets plus a manifest.json echoing the full configuration. */
qfloq_status qfloq_cmd_evolve(const char* config_json, const char* outdir,
                              char* err, size_t errlen);
qfloq_status qfloq_cmd_mps_evolve(const char* config_json, const char* outdir,
                                  char* err, size_t errlen);
qfloq_status qfloq_cmd_sweep(const char* config_json, const char* outdir,
                             char* err, size_t errlen);
/* figure: fig2|fig3|fig4a|fig4c|fig5a|fig5b|fig5c|dips; full=0 desk scale. */
qfloq_status qfloq_cmd_reproduce(const char* figure, int full, const char* outdir,
                                 char* err, size_t errlen);

/* ---- verification / inspection ------------------------------------------
 * On success *json_out receives a malloc'd JSON document; release it with
 * qfloq_string_free. */
qfloq_status qfloq_compile_check(char axis, double theta, int use_ledger,
                                 char** json_out, char* err, size_t errlen);
qfloq_status qfloq_ops_dump(const char* name, double theta, char** json_out,
                            char* err, size_t errlen);
void qfloq_string_free(char* s);

/* Closed-form thermalization step estimate; +inf for theta_x = 0, NaN when
 * the closed form leaves its domain. */
double qfloq_predict_nt(double theta_x, double theta_z, int L);
/* First crossing of overlap 1/2 in the same approximation, in 3-step blocks. */
double qfloq_nt_first_crossing(double theta_x, double theta_z, int L);

/* ---- opaque evolution handles -------------------------------------------
 * observe keys: "overlap", "mean_sz", "entropy_half", "fq", and for the MPS
 * handle additionally "chi", "discarded".  step(n) advances n Floquet
 * cycles. */
typedef struct qfloq_engine qfloq_engine;

qfloq_engine* qfloq_engine_new(int L, double theta_x, double theta_z,
                               double epsilon, const char* ux_mode, char* err,
                               size_t errlen);
qfloq_status qfloq_engine_step(qfloq_engine* h, int n, char* err, size_t errlen);
qfloq_status qfloq_engine_observe(const qfloq_engine* h, const char* what,
                                  double* out, char* err, size_t errlen);
void qfloq_engine_free(qfloq_engine* h);

typedef struct qfloq_tebd qfloq_tebd;

qfloq_tebd* qfloq_tebd_new(int L, double theta_x, double theta_z, double epsilon,
                           double tolerance, int chi_cap, int substeps,
                           char* err, size_t errlen);
/* Returns QFLOQ_CHI_CAP when the cap stops the run mid-way; the state keeps
 * the last completed step. */
qfloq_status qfloq_tebd_step(qfloq_tebd* h, int n, char* err, size_t errlen);
qfloq_status qfloq_tebd_observe(const qfloq_tebd* h, const char* what,
                                double* out, char* err, size_t errlen);
void qfloq_tebd_free(qfloq_tebd* h);

#ifdef __cplusplus
}
#endif

#endif /* QFLOQ_H */
