#ifndef SARUAV_H
#define SARUAV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
enum SaruavStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  SARUAV_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SARUAV_STATUS_NULL_POINTER = 1,
  /**
   * A value argument was out of range or unparseable.
   */
  SARUAV_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The underlying file could not be read or written.
   */
  SARUAV_STATUS_IO = 3,
  /**
   * The episode already ended; reset or regenerate first.
   */
  SARUAV_STATUS_EPISODE_FINISHED = 4,
  /**
   * The checkpoint bytes do not describe a policy.
   */
  SARUAV_STATUS_BAD_CHECKPOINT = 5,
  /**
   * A buffer length does not match the state dimension.
   */
  SARUAV_STATUS_DIMENSION_MISMATCH = 6,
};
#ifndef __cplusplus
typedef int32_t SaruavStatus;
#endif // __cplusplus

/**
 * Why an episode ended; mirrors the simulator's terminal causes.
 */
enum SaruavTerminal
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  SARUAV_TERMINAL_NONE = -1,
  SARUAV_TERMINAL_COLLISION = 0,
  SARUAV_TERMINAL_OUT_OF_BOUNDS = 1,
  SARUAV_TERMINAL_SPEED_FAILURE = 2,
  SARUAV_TERMINAL_DRIFT_FAILURE = 3,
  SARUAV_TERMINAL_SUCCESS = 4,
  SARUAV_TERMINAL_BATTERY_DEPLETED = 5,
  SARUAV_TERMINAL_TIMEOUT = 6,
};
#ifndef __cplusplus
typedef int32_t SaruavTerminal;
#endif // __cplusplus

/**
 * Opaque frozen policy loaded from a training checkpoint.
 */
typedef struct SaruavPolicy SaruavPolicy;

/**
 * Opaque episode simulator. Create with `saruav_sim_new`, destroy with
 * `saruav_sim_free`.
 */
typedef struct SaruavSim SaruavSim;

/**
 * One step's outcome.
 */
typedef struct {
  /**
   * Scalarized reward for the step.
   */
  double reward;
  /**
   * Cause of termination, or `None` while the episode is running.
   */
  SaruavTerminal terminal;
  /**
   * Steps taken so far in the episode.
   */
  size_t steps;
  /**
   * UAV position, metres.
   */
  double x;
  double y;
  /**
   * Remaining battery, percent of capacity.
   */
  double battery;
} SaruavStepInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *saruav_version(void);

/**
 * Build a simulator over a freshly generated layout. `scenario` is one of
 * `"e1"`, `"e2"`, `"e3"`; other world settings keep their defaults.
 *
 * # Safety
 * `scenario` must be a NUL-terminated string and `out` a valid pointer;
 * the returned handle must be released with `saruav_sim_free`.
 */
SaruavStatus saruav_sim_new(double arena_side,
                            size_t n_obstacles,
                            const char *scenario,
                            uint64_t seed,
                            SaruavSim **out);

/**
 * Release a simulator handle. Null is a no-op.
 *
 * # Safety
 * `sim` must have come from `saruav_sim_new` and not been freed already.
 */
void saruav_sim_free(SaruavSim *sim);

/**
 * Rewind the episode to the start of the current layout.
 *
 * # Safety
 * `sim` must be a live handle.
 */
SaruavStatus saruav_sim_reset(SaruavSim *sim);

/**
 * Generate a fresh layout from `seed` and reset onto it.
 *
 * # Safety
 * `sim` must be a live handle.
 */
SaruavStatus saruav_sim_regenerate(SaruavSim *sim, uint64_t seed);

/**
 * Length of the observation vector, or 0 for a null handle.
 *
 * # Safety
 * `sim` must be a live handle or null.
 */
size_t saruav_sim_state_dim(const SaruavSim *sim);

/**
 * Copy the current normalized observation into `out[0..len]`. `len` must
 * equal `saruav_sim_state_dim`.
 *
 * # Safety
 * `sim` must be a live handle; `out` must point at `len` writable doubles.
 */
SaruavStatus saruav_sim_state(const SaruavSim *sim, double *out, size_t len);

/**
 * Advance one step. `speed` and `turn` are command fractions in [-1, 1]
 * (values outside are clamped). Fails with `EpisodeFinished` once a
 * terminal was reached.
 *
 * # Safety
 * `sim` must be a live handle and `info` a valid pointer.
 */
SaruavStatus saruav_sim_step(SaruavSim *sim, double speed, double turn, SaruavStepInfo *info);

/**
 * Load a frozen policy from a training checkpoint.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer; the
 * returned handle must be released with `saruav_policy_free`.
 */
SaruavStatus saruav_policy_load(const char *path, SaruavPolicy **out);

/**
 * Release a policy handle. Null is a no-op.
 *
 * # Safety
 * `policy` must have come from `saruav_policy_load` and not been freed
 * already.
 */
void saruav_policy_free(SaruavPolicy *policy);

/**
 * State dimension the policy was trained on, or 0 for a null handle.
 *
 * # Safety
 * `policy` must be a live handle or null.
 */
size_t saruav_policy_state_dim(const SaruavPolicy *policy);

/**
 * Deterministic greedy action for `state[0..len]`; writes the speed and
 * turn command fractions.
 *
 * # Safety
 * `policy` must be a live handle; `state` must point at `len` doubles and
 * `speed`/`turn` at writable doubles.
 */
SaruavStatus saruav_policy_action(const SaruavPolicy *policy,
                                  const double *state,
                                  size_t len,
                                  double *speed,
                                  double *turn);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SARUAV_H */
