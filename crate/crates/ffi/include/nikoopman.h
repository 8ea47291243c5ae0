#ifndef NIKOOPMAN_H
#define NIKOOPMAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Selects a matrix of a model for `nk_model_matrix`.
typedef enum NkMatrix {
  NK_MATRIX_A = 0,
  NK_MATRIX_B = 1,
  NK_MATRIX_C = 2,
  NK_MATRIX_D = 3,
  // Lyapunov certificate; only NI models carry one.
  NK_MATRIX_P = 4,
} NkMatrix;

typedef enum NkMode {
  NK_MODE_NI = 0,
  NK_MODE_UNCONSTRAINED = 1,
} NkMode;

// Result code of every fallible call.
typedef enum NkStatus {
  NK_OK = 0,
  NK_NULL_POINTER = 1,
  NK_INVALID_ARGUMENT = 2,
  NK_DIMENSION_MISMATCH = 3,
  NK_SIMULATION_DIVERGED = 4,
  // The model was produced but the solver stopped at its iteration cap.
  NK_SOLVER_NOT_CONVERGED = 5,
  NK_NUMERICAL = 6,
  NK_IO = 7,
  NK_PARSE = 8,
  NK_BUFFER_TOO_SMALL = 9,
  NK_PANIC = 10,
} NkStatus;

typedef struct NkModel NkModel;

typedef struct NkTrajectory NkTrajectory;

// Mass-spring-damper coefficients.
typedef struct NkMsdParams {
  double m;
  double k1;
  double k3;
  double b0;
  double b1;
  double b2;
} NkMsdParams;

// Piecewise-constant random input, uniform on `[-amplitude, amplitude]`.
typedef struct NkSimulateOptions {
  double x0[2];
  double amplitude;
  size_t hold;
  uint64_t seed;
  double dt;
  size_t steps;
} NkSimulateOptions;

typedef struct NkIdentifyOptions {
  enum NkMode mode;
  // Zero selects the identity dictionary.
  size_t n_rbf;
  uint64_t center_seed;
  double alpha;
  bool strict_b;
  bool normalize;
  size_t max_iters;
} NkIdentifyOptions;

typedef struct NkClosedLoop {
  double dc_gain_lambda_max;
  double spectral_radius;
  // 1 stable, -1 unstable, 0 inconclusive.
  int32_t verdict;
} NkClosedLoop;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *nk_last_error(void);

// Default plant coefficients: unit mass and springs, pure nonlinear damping.
struct NkMsdParams nk_msd_params_default(void);

struct NkSimulateOptions nk_simulate_options_default(void);

struct NkIdentifyOptions nk_identify_options_default(void);

// Simulates the plant under a random-step input.
//
// # Safety
// Pointers must be null or valid for the pointed-to type.
enum NkStatus nk_simulate_msd(const struct NkMsdParams *params,
                              const struct NkSimulateOptions *opts,
                              struct NkTrajectory **out);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum NkStatus nk_trajectory_load(const char *path, struct NkTrajectory **out);

// # Safety
// `traj` must come from this library; `path` must be a NUL-terminated string.
enum NkStatus nk_trajectory_save(const struct NkTrajectory *traj, const char *path);

// Number of samples, or 0 for a null handle.
//
// # Safety
// `traj` must be null or come from this library.
size_t nk_trajectory_steps(const struct NkTrajectory *traj);

// # Safety
// `traj` must be null or come from this library.
size_t nk_trajectory_state_dim(const struct NkTrajectory *traj);

// Copies the `steps x n` state table.
//
// # Safety
// `buf` must hold `len` doubles.
enum NkStatus nk_trajectory_states(const struct NkTrajectory *traj, double *buf, size_t len);

// Copies the `steps x m` input table.
//
// # Safety
// `buf` must hold `len` doubles.
enum NkStatus nk_trajectory_inputs(const struct NkTrajectory *traj, double *buf, size_t len);

// # Safety
// `traj` must be null or come from this library and not be freed twice.
void nk_trajectory_free(struct NkTrajectory *traj);

// Fits a lifted model to `traj`. On `NK_SOLVER_NOT_CONVERGED` the model is
// still returned through `out` and must be freed.
//
// # Safety
// Pointers must be null or valid for the pointed-to type.
enum NkStatus nk_identify(const struct NkTrajectory *traj,
                          const struct NkIdentifyOptions *opts,
                          struct NkModel **out);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum NkStatus nk_model_load(const char *path, struct NkModel **out);

// # Safety
// `model` must come from this library; `path` must be a NUL-terminated string.
enum NkStatus nk_model_save(const struct NkModel *model, const char *path);

// Serializes the model as JSON into a string released with `nk_string_free`.
//
// # Safety
// `model` must come from this library; `out` must be writable.
enum NkStatus nk_model_to_json(const struct NkModel *model, char **out);

// # Safety
// `s` must be null or come from `nk_model_to_json`.
void nk_string_free(char *s);

// Writes the shape of the selected matrix. `P` is `0 x 0` when absent.
//
// # Safety
// `model` must come from this library; `rows` and `cols` must be writable.
enum NkStatus nk_model_shape(const struct NkModel *model,
                             enum NkMatrix which,
                             size_t *rows,
                             size_t *cols);

// Copies the selected matrix row-major.
//
// # Safety
// `model` must come from this library; `buf` must hold `len` doubles.
enum NkStatus nk_model_matrix(const struct NkModel *model,
                              enum NkMatrix which,
                              double *buf,
                              size_t len);

// Spectral radius of `A_d` (tight power-iteration estimate).
//
// # Safety
// `model` must come from this library; `rho` must be writable.
enum NkStatus nk_model_spectral_radius(const struct NkModel *model, double *rho);

// Frequency-domain NI check of the continuous image of the model on a
// logarithmic grid. `passes` is set when the minimum eigenvalue is at least
// `-tol::NI_FREQUENCY`.
//
// # Safety
// `model` must come from this library; output pointers must be writable.
enum NkStatus nk_model_ni_check(const struct NkModel *model,
                                double omega_min,
                                double omega_max,
                                size_t points,
                                double *min_eig,
                                bool *passes);

// Positive feedback with `k / (s^2 + 2 zeta omega s + omega^2)`, sampled at
// the model's `T`.
//
// # Safety
// `model` must come from this library; `out` must be writable.
enum NkStatus nk_model_ppf_closed_loop(const struct NkModel *model,
                                       double k,
                                       double zeta,
                                       double omega,
                                       struct NkClosedLoop *out);

// # Safety
// `model` must be null or come from this library and not be freed twice.
void nk_model_free(struct NkModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NIKOOPMAN_H */
