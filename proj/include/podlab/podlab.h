/* C interface to podlab: full-order Burgers snapshots, POD bases, reduced
 * order model sweeps and verification suites.
 *
 * Every function returning podlab_status reports failures through the code
 * and a thread-local message readable with podlab_last_error(). Handles are
 * opaque; release each with its matching *_free function. Strings returned
 * through char** are owned by the caller and released with
 * podlab_string_free().
 */
#ifndef PODLAB_PODLAB_H
#define PODLAB_PODLAB_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(PODLAB_BUILDING_LIBRARY)
#define PODLAB_API __attribute__((visibility("default")))
#else
#define PODLAB_API
#endif

typedef enum podlab_status {
  PODLAB_OK = 0,
  PODLAB_ERR_INVALID_ARGUMENT = 1,
  PODLAB_ERR_DIMENSION_MISMATCH = 2,
  PODLAB_ERR_NONLINEAR_SOLVE = 3,
  PODLAB_ERR_EMPTY_BASIS = 4,
  PODLAB_ERR_ILL_CONDITIONED = 5,
  PODLAB_ERR_IO = 6,
  PODLAB_ERR_VERIFICATION = 7,
  PODLAB_ERR_INTERNAL = 99
} podlab_status;

typedef struct podlab_config podlab_config;
typedef struct podlab_snapshots podlab_snapshots;
typedef struct podlab_basis podlab_basis;
typedef struct podlab_sweep podlab_sweep;

typedef void (*podlab_warning_fn)(const char* message, void* user);

PODLAB_API const char* podlab_version(void);
/* Message of the last failure on the calling thread ("" if none). */
PODLAB_API const char* podlab_last_error(void);
/* NULL restores the default sink (stderr). */
PODLAB_API void podlab_set_warning_callback(podlab_warning_fn fn, void* user);
PODLAB_API void podlab_string_free(char* s);

/* Configuration. Fields missing from the JSON keep their defaults. */
PODLAB_API podlab_status podlab_config_default(podlab_config** out);
PODLAB_API podlab_status podlab_config_from_json(const char* json,
                                                 podlab_config** out);
PODLAB_API podlab_status podlab_config_to_json(const podlab_config* cfg,
                                               char** out);
PODLAB_API void podlab_config_free(podlab_config* cfg);

/* Full-order run with the step initial condition and zero forcing. */
PODLAB_API podlab_status podlab_fom_run(const podlab_config* cfg,
                                        podlab_snapshots** out);
PODLAB_API podlab_status podlab_snapshots_save(const podlab_snapshots* s,
                                               const char* path);
PODLAB_API podlab_status podlab_snapshots_load(const char* path,
                                               podlab_snapshots** out);
/* n_times = N + 1; dim = interior node count. */
PODLAB_API podlab_status podlab_snapshots_shape(const podlab_snapshots* s,
                                                int* n_times, int* dim);
/* Copies snapshot k into buf (len >= dim). */
PODLAB_API podlab_status podlab_snapshots_get(const podlab_snapshots* s, int k,
                                              double* buf, int len);
PODLAB_API void podlab_snapshots_free(podlab_snapshots* s);

/* framework: "noDQ-L2", "noDQ-H01", "DQ-L2" or "DQ-H01". */
PODLAB_API podlab_status podlab_basis_build(const podlab_snapshots* s,
                                            const podlab_config* cfg,
                                            const char* framework,
                                            podlab_basis** out);
PODLAB_API podlab_status podlab_basis_save(const podlab_basis* b,
                                           const char* matrix_path,
                                           const char* sidecar_path);
PODLAB_API podlab_status podlab_basis_load(const char* matrix_path,
                                           const char* sidecar_path,
                                           podlab_basis** out);
PODLAB_API podlab_status podlab_basis_dimension(const podlab_basis* b, int* d);
/* Writes the framework name into buf (NUL-terminated, truncated to len). */
PODLAB_API podlab_status podlab_basis_framework(const podlab_basis* b,
                                                char* buf, int len);
/* Copies the d eigenvalues into buf (len >= d). */
PODLAB_API podlab_status podlab_basis_eigenvalues(const podlab_basis* b,
                                                  double* buf, int len);
PODLAB_API void podlab_basis_free(podlab_basis* b);

/* One reduced run per configured r (clamped to d), with every diagnostic.
 * The viscosity and time step are those of the snapshots. */
PODLAB_API podlab_status podlab_sweep_run(const podlab_snapshots* s,
                                          const podlab_basis* b,
                                          const podlab_config* cfg,
                                          podlab_sweep** out);
PODLAB_API podlab_status podlab_sweep_rows(const podlab_sweep* sw, int* rows);
/* column: any sweep CSV column name, e.g. "r", "err_linf_l2", "tail". */
PODLAB_API podlab_status podlab_sweep_value(const podlab_sweep* sw, int row,
                                            const char* column, double* out);
/* quantity: "err_linf_l2" or "err_natural". Any output pointer may be NULL. */
PODLAB_API podlab_status podlab_sweep_regression(const podlab_sweep* sw,
                                                 const char* quantity,
                                                 double* slope,
                                                 double* r_squared, int* r_min,
                                                 int* r_max);
/* Writes sweep_<fw>.csv, regression_<fw>.csv and sweep_<fw>.json into dir. */
PODLAB_API podlab_status podlab_sweep_save(const podlab_sweep* sw,
                                           const podlab_config* cfg,
                                           const char* dir);
/* Sidecar JSON (family, bound constants, regressions). */
PODLAB_API podlab_status podlab_sweep_summary(const podlab_sweep* sw,
                                              const podlab_config* cfg,
                                              char** json);
PODLAB_API void podlab_sweep_free(podlab_sweep* sw);

/* Appends framework,r,t,x,u_fom,u_rom rows for the configured solution r
 * values and times to csv_path (header written when the file is new or
 * truncate != 0). summary_json, if not NULL, receives the per-(r, t) L2
 * errors. */
PODLAB_API podlab_status podlab_solutions_save(const podlab_snapshots* s,
                                               const podlab_basis* b,
                                               const podlab_config* cfg,
                                               const char* csv_path,
                                               int truncate,
                                               char** summary_json);

/* suite: "identities", "convergence" or "all". perturb != 0 scales the POD
 * eigenvalues before the identity checks (negative control). The report is
 * returned as JSON; *passed is 1 when every check passed. A failing check
 * is not an error: the call returns PODLAB_OK. */
PODLAB_API podlab_status podlab_verify_run(const char* suite, int perturb,
                                           char** report_json, int* passed);

#ifdef __cplusplus
}
#endif

#endif /* PODLAB_PODLAB_H */
