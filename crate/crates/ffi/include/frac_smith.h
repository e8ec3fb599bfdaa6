#ifndef FRAC_SMITH_H
#define FRAC_SMITH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum FsStatus {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_INVALID_ARGUMENT = 2,
  FS_STATUS_FIT_FAILED = 3,
  FS_STATUS_NUMERICAL = 4,
  FS_STATUS_BUFFER_TOO_SMALL = 5,
  FS_STATUS_PANIC = 6,
} FsStatus;

typedef enum FsTopology {
  FS_TOPOLOGY_FIG1_PREDICTOR = 0,
  FS_TOPOLOGY_FIG3_EQUIVALENT = 1,
} FsTopology;

typedef enum FsSignal {
  FS_SIGNAL_TIME = 0,
  FS_SIGNAL_SETPOINT = 1,
  FS_SIGNAL_DISTURBANCE = 2,
  FS_SIGNAL_CONTROL = 3,
  FS_SIGNAL_OUTPUT = 4,
  FS_SIGNAL_ERROR = 5,
} FsSignal;

// Opaque closed-loop model.
typedef struct FsLoop FsLoop;

// Opaque simulation result.
typedef struct FsTrajectory FsTrajectory;

// Plant, controller, predictor split and approximation band of one loop.
typedef struct FsLoopParams {
  double gain;
  double time_constant;
  double order;
  double k_p;
  double k_i;
  double lambda;
  double chi;
  double omega_low;
  double omega_high;
  uintptr_t n_sections;
  enum FsTopology topology;
} FsLoopParams;

typedef struct FsSimParams {
  double dt;
  double horizon;
  double setpoint_time;
  double setpoint_amp;
  double disturbance_time;
  double disturbance_amp;
} FsSimParams;

typedef struct FsObjectives {
  double j1;
  double j2;
  bool penalized;
} FsObjectives;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next library call on this thread.
const char *fs_last_error(void);

// Oustaloup approximation of `s^order`. Writes `2 sections + 2`
// coefficients (descending powers) to each of `num` and `den`, each of
// capacity `cap`, and the count to `len`.
//
// # Safety
// `num` and `den` must point to `cap` writable doubles; `len` must be valid.
enum FsStatus fs_oustaloup(double order,
                           double omega_low,
                           double omega_high,
                           uintptr_t n_sections,
                           double *num,
                           double *den,
                           uintptr_t cap,
                           uintptr_t *len);

// Fits all blocks and wires a loop. On success `*out` owns a new handle.
//
// # Safety
// `params` and `out` must be valid pointers.
enum FsStatus fs_loop_new(const struct FsLoopParams *params, struct FsLoop **out);

// Number of states of the loop, 0 for a null handle.
//
// # Safety
// `lp` must be null or a live handle from [`fs_loop_new`].
uintptr_t fs_loop_order(const struct FsLoop *lp);

// Simulates from zero initial state. On success `*out` owns a new
// trajectory handle.
//
// # Safety
// `lp` must be a live loop handle; `sim` and `out` valid pointers.
enum FsStatus fs_loop_simulate(struct FsLoop *lp,
                               const struct FsSimParams *sim,
                               struct FsTrajectory **out);

// # Safety
// `lp` must be null or a handle from [`fs_loop_new`] not yet freed.
void fs_loop_free(struct FsLoop *lp);

// Number of samples, 0 for a null handle.
//
// # Safety
// `tr` must be null or a live trajectory handle.
uintptr_t fs_trajectory_len(const struct FsTrajectory *tr);

// # Safety
// `tr` must be null or a live trajectory handle.
bool fs_trajectory_diverged(const struct FsTrajectory *tr);

// Copies one signal into `buf` (capacity `cap`).
//
// # Safety
// `tr` must be a live trajectory handle and `buf` hold `cap` doubles.
enum FsStatus fs_trajectory_copy(const struct FsTrajectory *tr,
                                 enum FsSignal signal,
                                 double *buf,
                                 uintptr_t cap);

// ITAE and control energy (penalty pair for a diverged run).
//
// # Safety
// `tr` must be a live trajectory handle and `out` valid.
enum FsStatus fs_trajectory_objectives(const struct FsTrajectory *tr, struct FsObjectives *out);

// # Safety
// `tr` must be null or a trajectory handle not yet freed.
void fs_trajectory_free(struct FsTrajectory *tr);

// Two-objective hypervolume of `n` points `(j1[k], j2[k])`.
//
// # Safety
// `j1` and `j2` must hold `n` doubles (may be null when `n == 0`); `out`
// must be valid.
enum FsStatus fs_hypervolume(const double *j1,
                             const double *j2,
                             uintptr_t n,
                             double ref_j1,
                             double ref_j2,
                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAC_SMITH_H */
