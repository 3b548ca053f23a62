#ifndef CLOCKWORK_H
#define CLOCKWORK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum cw_status {
  CW_STATUS_OK = 0,
  CW_STATUS_NULL_POINTER = 1,
  // Parameter outside its domain, or malformed input.
  CW_STATUS_INVALID_ARGUMENT = 2,
  // The solver or optimiser did not finish. Partial results may still be
  // returned.
  CW_STATUS_NUMERICAL = 3,
  // The requested event or sample does not exist.
  CW_STATUS_NOT_FOUND = 4,
  CW_STATUS_PANIC = 5,
} cw_status;

// Switchover-time measurements for fitting.
typedef struct cw_measurements cw_measurements;

// Integrated trajectory, either `(beta, gamma)` against `tau` or `(a, b, c)`
// against seconds.
typedef struct cw_trajectory cw_trajectory;

// Solver settings. Zero fields take the library defaults; `samples = 0`
// keeps one sample per accepted step.
typedef struct cw_solver_options {
  double t_end;
  double rel_tol;
  double abs_tol;
  size_t max_steps;
  size_t samples;
} cw_solver_options;

typedef struct cw_fit_result {
  double k0;
  double phi;
  double sse;
  double gradient_norm;
  size_t iterations;
  bool converged;
} cw_fit_result;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`) and returns the full message length excluding the NUL.
// Returns 0 when there is no error.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t cw_last_error(char *buf, size_t len);

// Integrates the dimensionless system from `beta = phi`, `gamma = 1`.
//
// On `CW_STATUS_NUMERICAL` `*out` holds the partial trajectory, which the
// caller must still free.
//
// # Safety
// `opts` must point to a valid options struct and `out` to writable storage.
enum cw_status cw_integrate(double eps,
                            double rho,
                            double phi,
                            const struct cw_solver_options *opts,
                            struct cw_trajectory **out);

// Integrates the full system `(a, b, c)` in seconds.
//
// # Safety
// As for [`cw_integrate`].
enum cw_status cw_integrate_dimensional(double k0,
                                        double k1,
                                        double a0,
                                        double b0,
                                        double c0,
                                        const struct cw_solver_options *opts,
                                        struct cw_trajectory **out);

// # Safety
// `traj` must be null or a handle from this library not yet freed.
void cw_trajectory_free(struct cw_trajectory *traj);

// Number of state components: 2 or 3.
//
// # Safety
// `traj` must be a live handle.
size_t cw_trajectory_dim(const struct cw_trajectory *traj);

// # Safety
// `traj` must be a live handle.
size_t cw_trajectory_len(const struct cw_trajectory *traj);

// Sample `index`: its time in `*t` and state in `y[0..dim]`.
//
// # Safety
// `traj` must be a live handle, `t` writable and `y` must have room for
// `cw_trajectory_dim(traj)` values.
enum cw_status cw_trajectory_sample(const struct cw_trajectory *traj,
                                    size_t index,
                                    double *t,
                                    double *y);

// Dense-output state at time `t`, written to `y[0..dim]`.
//
// # Safety
// As for [`cw_trajectory_sample`].
enum cw_status cw_trajectory_interpolate(const struct cw_trajectory *traj, double t, double *y);

// First upward crossing of `beta = threshold` (or `b = threshold m0` for a
// dimensional trajectory). `CW_STATUS_NOT_FOUND` if there is none.
//
// # Safety
// `traj` must be a live handle and `time` writable.
enum cw_status cw_trajectory_switchover(const struct cw_trajectory *traj,
                                        double threshold,
                                        double *time);

// Predicted switchover time in seconds, `(c0 - b0) / (k0 m0^2)`.
//
// # Safety
// `out` must be writable.
enum cw_status cw_switchover_time(double k0,
                                  double k1,
                                  double a0,
                                  double b0,
                                  double c0,
                                  double *out);

// Same prediction from a measurement's `c0`, `m0` and fitted `(k0, phi)`.
//
// # Safety
// `out` must be writable.
enum cw_status cw_predict(double c0, double m0, double k0, double phi, double *out);

// Asymptotic approximation at `tau`. `region` 0 picks the region from the
// default classifier; 1 to 4 force region I to IV. The region used is
// written to `*region_out` (1 to 4) when that pointer is non-null.
//
// # Safety
// `beta` and `gamma` must be writable; `region_out` may be null.
enum cw_status cw_asymptotic_eval(double eps,
                                  double rho,
                                  double phi,
                                  double tau,
                                  uint32_t region,
                                  uint32_t *region_out,
                                  double *beta,
                                  double *gamma);

// Dimensionless switchover time `(rho^-2 - phi/rho) / eps`.
//
// # Safety
// `out` must be writable.
enum cw_status cw_dimensionless_switchover_time(double eps, double rho, double phi, double *out);

// Jacobian eigenvalues at the equilibrium `(1/2, 0)`, into `out[0..2]`.
//
// # Safety
// `out` must have room for two values.
enum cw_status cw_equilibrium_eigenvalues(double eps, double rho, double phi, double *out);

// Quasi-steady `beta` for a given `gamma` in `[0, 1]`.
//
// # Safety
// `out` must be writable.
enum cw_status cw_quasi_steady_beta(double eps, double rho, double phi, double gamma, double *out);

// Empty measurement set.
//
// # Safety
// `out` must be writable.
enum cw_status cw_measurements_new(struct cw_measurements **out);

// The bundled vitamin C clock data set.
//
// # Safety
// `out` must be writable.
enum cw_status cw_measurements_bundled(struct cw_measurements **out);

// Parses CSV text with header `series_id,c0_mol_l,m0_mol_l,t_sw_s`.
//
// # Safety
// `csv` must be a NUL-terminated string and `out` writable.
enum cw_status cw_measurements_parse(const char *csv, struct cw_measurements **out);

// Appends one measurement.
//
// # Safety
// `set` must be a live handle.
enum cw_status cw_measurements_push(struct cw_measurements *set, double c0, double m0, double t_sw);

// # Safety
// `set` must be a live handle.
size_t cw_measurements_len(const struct cw_measurements *set);

// # Safety
// `set` must be null or a handle from this library not yet freed.
void cw_measurements_free(struct cw_measurements *set);

// Least-squares fit of `(k0, phi)`. Non-positive `k0_init` or a zero
// `max_iterations` take the defaults. A fit that stops without converging
// fills `*out` and returns `CW_STATUS_NUMERICAL`.
//
// # Safety
// `set` must be a live handle and `out` writable.
enum cw_status cw_fit(const struct cw_measurements *set,
                      double k0_init,
                      double phi_init,
                      size_t max_iterations,
                      struct cw_fit_result *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLOCKWORK_H */
