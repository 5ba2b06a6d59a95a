/* glekit: GLE memory-kernel extraction, transferable kernel surrogates and
 * extended Markovian dynamics behind a C interface.
 *
 * Conventions:
 *   - Every function returns a glek_status; 0 means success.
 *   - On failure, glek_last_error() describes the problem (thread local).
 *   - Objects are opaque handles released with their matching _free();
 *     freeing NULL is a no-op.
 *   - Strings returned through char** are released with glek_string_free().
 */
#ifndef GLEKIT_H
#define GLEKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GLEK_API __declspec(dllexport)
#else
#define GLEK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum glek_status {
  GLEK_OK = 0,
  GLEK_ERR_VALIDATION = 2,   /* bad arguments, shapes, files, groupings */
  GLEK_ERR_DATA_REQUEST = 3, /* an oracle needs data that is not there yet */
  GLEK_ERR_NUMERIC = 4       /* singular or failed numerical procedure */
} glek_status;

GLEK_API const char* glek_last_error(void);

/* After a GLEK_ERR_DATA_REQUEST failure, copies the parameter point whose
 * kernel was requested (up to buf_len coordinates; buf may be NULL to query
 * the size) and returns its dimension. Returns 0 when no request is
 * pending. Any later successful call clears the pending request. */
GLEK_API size_t glek_last_request(double* buf, size_t buf_len);

GLEK_API void glek_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Time series                                                        */
/* ------------------------------------------------------------------ */

typedef struct glek_series glek_series;

typedef enum glek_series_kind {
  GLEK_SERIES_VACF = 0,
  GLEK_SERIES_FVCF = 1,
  GLEK_SERIES_KERNEL = 2,
  GLEK_SERIES_MSD = 3,
  GLEK_SERIES_DIFFUSION = 4
} glek_series_kind;

GLEK_API glek_status glek_series_new(double dt, double t_offset, size_t n,
                                     const double* values,
                                     glek_series_kind kind, glek_series** out);
GLEK_API void glek_series_free(glek_series* s);
GLEK_API size_t glek_series_size(const glek_series* s);
GLEK_API double glek_series_dt(const glek_series* s);
GLEK_API double glek_series_t_offset(const glek_series* s);
GLEK_API glek_series_kind glek_series_get_kind(const glek_series* s);
GLEK_API const double* glek_series_values(const glek_series* s);

GLEK_API glek_status glek_series_read_csv(const char* path,
                                          glek_series_kind kind,
                                          glek_series** out);
GLEK_API glek_status glek_series_write_csv(const glek_series* s,
                                           const char* path);

/* Relative L2 difference ||a - b|| / ||b|| on a shared grid. */
GLEK_API glek_status glek_relative_error(const glek_series* a,
                                         const glek_series* b, double* out);

/* ------------------------------------------------------------------ */
/* Kernel extraction                                                  */
/* ------------------------------------------------------------------ */

typedef enum glek_extract_mode {
  GLEK_EXTRACT_DIRECT = 0,
  GLEK_EXTRACT_TIKHONOV = 1,
  GLEK_EXTRACT_AUTO = 2
} glek_extract_mode;

/* Regularization ladder beta_j = start * ratio^j, j = 0..count-1. Pass
 * count = 0 anywhere a ladder is expected to get the default (1, 0.5, 41). */
typedef struct glek_beta_grid {
  double start;
  double ratio;
  size_t count;
} glek_beta_grid;

/* cond_threshold <= 0 selects the default of 1e8 (AUTO mode only). */
GLEK_API glek_status glek_extract_kernel(const glek_series* vacf,
                                         const glek_series* fvcf,
                                         glek_extract_mode mode,
                                         double cond_threshold,
                                         const glek_beta_grid* betas,
                                         glek_series** out);

/* Condition estimate of the Volterra factor assembled from (vacf, fvcf). */
GLEK_API glek_status glek_condition_estimate(const glek_series* vacf,
                                             const glek_series* fvcf,
                                             double* out);

/* Regularized derivative; for a VACF input this is the FVCF. */
GLEK_API glek_status glek_derivative(const glek_series* f,
                                     const glek_beta_grid* betas,
                                     glek_series** out);

/* ------------------------------------------------------------------ */
/* Trajectories and correlation estimators                            */
/* ------------------------------------------------------------------ */

typedef struct glek_trajectory glek_trajectory;

/* Arrays are indexed [frame][particle][axis], length n_frames*n_particles*dim. */
GLEK_API glek_status glek_trajectory_new(size_t n_particles, size_t n_frames,
                                         size_t dim, double mass,
                                         double dt_record,
                                         const double* positions,
                                         const double* momenta,
                                         glek_trajectory** out);
GLEK_API void glek_trajectory_free(glek_trajectory* t);
GLEK_API size_t glek_trajectory_particles(const glek_trajectory* t);
GLEK_API size_t glek_trajectory_frames(const glek_trajectory* t);
GLEK_API size_t glek_trajectory_dim(const glek_trajectory* t);
GLEK_API double glek_trajectory_mass(const glek_trajectory* t);
GLEK_API double glek_trajectory_dt(const glek_trajectory* t);
GLEK_API const double* glek_trajectory_positions(const glek_trajectory* t);
GLEK_API const double* glek_trajectory_momenta(const glek_trajectory* t);

GLEK_API glek_status glek_trajectory_write_csv(const glek_trajectory* t,
                                               const char* path);
/* meta_path may be NULL to use <path>.meta.json. */
GLEK_API glek_status glek_trajectory_read_csv(const char* path,
                                              const char* meta_path,
                                              glek_trajectory** out);

/* Cluster atoms into CG particles. clusters is a flat list of atom indices;
 * cluster_sizes holds n_clusters entries that partition it. */
GLEK_API glek_status glek_coarse_grain(const glek_trajectory* atoms,
                                       const size_t* cluster_atoms,
                                       const size_t* cluster_sizes,
                                       size_t n_clusters,
                                       const double* atom_masses,
                                       glek_trajectory** out);

GLEK_API glek_status glek_vacf(const glek_trajectory* t, size_t max_lag,
                               glek_series** out);
GLEK_API glek_status glek_msd(const glek_trajectory* t, size_t max_lag,
                              glek_series** out);
GLEK_API glek_status glek_diffusion_coefficient(const glek_series* vacf,
                                                size_t dim, glek_series** out);

/* ------------------------------------------------------------------ */
/* Oscillator expansions and extended dynamics                        */
/* ------------------------------------------------------------------ */

typedef struct glek_expansion glek_expansion;
typedef struct glek_system glek_system;

/* abcq holds 4 doubles per term: a, b, c, q. */
GLEK_API glek_status glek_expansion_new(size_t n_terms, const double* abcq,
                                        glek_expansion** out);
GLEK_API void glek_expansion_free(glek_expansion* e);
GLEK_API size_t glek_expansion_terms(const glek_expansion* e);
GLEK_API glek_status glek_expansion_coefficients(const glek_expansion* e,
                                                 double* abcq);
GLEK_API glek_status glek_expansion_eval(const glek_expansion* e, double dt,
                                         double t_offset, size_t n,
                                         glek_series** out);

GLEK_API glek_status glek_expansion_write_json(const glek_expansion* e,
                                               double rel_residual,
                                               const char* path);
GLEK_API glek_status glek_expansion_read_json(const char* path,
                                              glek_expansion** out,
                                              double* rel_residual);

/* Damped-oscillator fit of a kernel series; returns the achieved relative
 * L2 residual through rel_residual when non-NULL. n_starts <= 0 and
 * residual_ceiling <= 0 select the defaults (8 starts, ceiling 1). */
GLEK_API glek_status glek_fit_expansion(const glek_series* kernel,
                                        size_t n_terms, int n_starts,
                                        uint64_t seed, double residual_ceiling,
                                        glek_expansion** out,
                                        double* rel_residual);

GLEK_API glek_status glek_system_new(const glek_expansion* e, double mass,
                                     double kbt, glek_system** out);
GLEK_API void glek_system_free(glek_system* s);
GLEK_API glek_status glek_matrix_kernel(const glek_system* s, double dt,
                                        double t_offset, size_t n,
                                        glek_series** out);
GLEK_API glek_status glek_analytic_vacf(const glek_system* s, double dt,
                                        size_t n, size_t dim,
                                        glek_series** out);
GLEK_API glek_status glek_analytic_fvcf(const glek_system* s, double dt,
                                        size_t n, size_t dim,
                                        glek_series** out);

/* Stability default (1/20) / max(a_l, q_l) for the expansion. */
GLEK_API glek_status glek_default_time_step(const glek_expansion* e,
                                            double* out);

typedef enum glek_scheme {
  GLEK_SCHEME_IMPLICIT_VV = 0,
  GLEK_SCHEME_EXACT_OU = 1
} glek_scheme;

GLEK_API glek_status glek_simulate(const glek_system* s, double dt,
                                   size_t n_steps, size_t record_every,
                                   size_t n_particles, size_t dim,
                                   glek_scheme scheme, uint64_t seed,
                                   glek_trajectory** out);

/* ------------------------------------------------------------------ */
/* Snapshots and surrogates                                           */
/* ------------------------------------------------------------------ */

typedef struct glek_snapshots glek_snapshots;
typedef struct glek_surrogate glek_surrogate;

GLEK_API glek_status glek_snapshots_new(size_t param_dim,
                                        glek_snapshots** out);
/* The first added kernel pins the grid; later ones must match it. */
GLEK_API glek_status glek_snapshots_add(glek_snapshots* s, const double* mu,
                                        const glek_series* kernel);
GLEK_API void glek_snapshots_free(glek_snapshots* s);
GLEK_API size_t glek_snapshots_count(const glek_snapshots* s);
GLEK_API glek_status glek_snapshots_read_manifest(const char* path,
                                                  glek_snapshots** out);
GLEK_API glek_status glek_snapshots_point(const glek_snapshots* s, size_t i,
                                          double* mu);
GLEK_API glek_status glek_snapshots_kernel(const glek_snapshots* s, size_t i,
                                           glek_series** out);

typedef struct glek_gpr_config {
  int restarts;
  int max_iters;
  double tol;
  uint64_t seed;
} glek_gpr_config;

GLEK_API glek_gpr_config glek_gpr_config_default(void);

/* time_stride subsamples the grid for training only; 0 or 1 keeps all. */
GLEK_API glek_status glek_train_direct(const glek_snapshots* s,
                                       const glek_gpr_config* cfg,
                                       size_t time_stride,
                                       glek_surrogate** out);
GLEK_API glek_status glek_train_rom_gpr(const glek_snapshots* s,
                                        double zeta_pod,
                                        const glek_gpr_config* cfg,
                                        glek_surrogate** out);
GLEK_API void glek_surrogate_free(glek_surrogate* s);

GLEK_API glek_status glek_surrogate_save(const glek_surrogate* s,
                                         const char* path);
GLEK_API glek_status glek_surrogate_load(const char* path,
                                         glek_surrogate** out);

/* "gpr" or "rom-gpr". */
GLEK_API const char* glek_surrogate_method(const glek_surrogate* s);
GLEK_API size_t glek_surrogate_param_dim(const glek_surrogate* s);
GLEK_API size_t glek_surrogate_rank(const glek_surrogate* s);
GLEK_API double glek_surrogate_pod_error(const glek_surrogate* s);
GLEK_API size_t glek_surrogate_training_count(const glek_surrogate* s);
GLEK_API glek_status glek_surrogate_training_point(const glek_surrogate* s,
                                                   size_t i, double* mu);
GLEK_API glek_status glek_surrogate_training_kernel(const glek_surrogate* s,
                                                    size_t i,
                                                    glek_series** out);

/* Predicted kernel on the training grid. mode_stds (length rank, ROM only)
 * and pointwise_std may be NULL when not wanted. */
GLEK_API glek_status glek_surrogate_predict(const glek_surrogate* s,
                                            const double* mu,
                                            glek_series** kernel,
                                            glek_series** pointwise_std,
                                            double* mode_stds);

/* ------------------------------------------------------------------ */
/* Active learning                                                    */
/* ------------------------------------------------------------------ */

/* Fills *out with the kernel for mu (length dim); the library takes
 * ownership of that series. Return GLEK_OK, or GLEK_ERR_DATA_REQUEST when
 * the data does not exist yet, or any other nonzero status to abort. */
typedef glek_status (*glek_oracle_fn)(void* user, const double* mu, size_t dim,
                                      glek_series** out);

typedef struct glek_active_report glek_active_report;

/* Uncertainty-guided sampling over a discrete pool (row-major, n_pool x dim).
 * budget = 0 selects the default cap of 100 samples. out_report may be NULL. */
GLEK_API glek_status glek_active_learn(
    const double* pool, size_t n_pool, size_t dim, const double* initial,
    size_t n_initial, double zeta_al, double zeta_pod, size_t budget,
    const glek_gpr_config* cfg, glek_oracle_fn oracle, void* user,
    glek_surrogate** out_surrogate, glek_active_report** out_report);

/* Same run driven by kernels stored as <data_dir>/kernel_<tag>.csv. A missing
 * file fails with GLEK_ERR_DATA_REQUEST; the point is then available through
 * glek_last_request. */
GLEK_API glek_status glek_active_learn_files(
    const char* data_dir, const double* pool, size_t n_pool, size_t dim,
    const double* initial, size_t n_initial, double zeta_al, double zeta_pod,
    size_t budget, const glek_gpr_config* cfg, glek_surrogate** out_surrogate,
    glek_active_report** out_report);

GLEK_API void glek_active_report_free(glek_active_report* r);
GLEK_API size_t glek_active_report_samples(const glek_active_report* r);
GLEK_API glek_status glek_active_report_sample(const glek_active_report* r,
                                               size_t i, double* mu);
GLEK_API size_t glek_active_report_history_length(const glek_active_report* r);
GLEK_API glek_status glek_active_report_history(const glek_active_report* r,
                                                size_t i, double* mu,
                                                double* sigma_bar);
GLEK_API int glek_active_report_converged(const glek_active_report* r);
GLEK_API double glek_active_report_final_sigma(const glek_active_report* r);

/* Stable 16-hex-digit tag for a parameter point and the kernel file name
 * (kernel_<tag>.csv) the file-backed oracle protocol uses. buf must hold at
 * least 64 bytes. */
GLEK_API glek_status glek_point_tag(const double* mu, size_t dim, char* buf,
                                    size_t buf_len);
GLEK_API glek_status glek_kernel_filename(const double* mu, size_t dim,
                                          char* buf, size_t buf_len);

/* Pool document {"version", "points", "initial"}. Coordinates are returned
 * row-major; free both arrays with glek_buffer_free. */
GLEK_API glek_status glek_pool_read_json(const char* path, double** points,
                                         size_t* n_points, double** initial,
                                         size_t* n_initial, size_t* dim);
GLEK_API void glek_buffer_free(double* buf);

/* ------------------------------------------------------------------ */
/* Built-in benchmark family                                          */
/* ------------------------------------------------------------------ */

GLEK_API glek_status glek_benchmark_kernel(const double* mu, double dt,
                                           size_t n, glek_series** out);
GLEK_API glek_status glek_benchmark_vacf(const double* mu, double dt, size_t n,
                                         glek_series** out);
GLEK_API glek_status glek_benchmark_fvcf(const double* mu, double dt, size_t n,
                                         glek_series** out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GLEKIT_H */
