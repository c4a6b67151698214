#ifndef MDSOLVE_H
#define MDSOLVE_H

/* Generated by cbindgen from the mdsolve-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a C API call.
 */
typedef enum {
  MDSOLVE_STATUS_OK = 0,
  /**
   * A null pointer or otherwise unusable argument.
   */
  MDSOLVE_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The configuration could not be parsed or validated.
   */
  MDSOLVE_STATUS_CONFIG_ERROR = 2,
  /**
   * The implicit solver or time integrator failed.
   */
  MDSOLVE_STATUS_SOLVER_FAILURE = 3,
  /**
   * Reading the configuration file failed.
   */
  MDSOLVE_STATUS_IO_ERROR = 4,
  /**
   * An internal panic was caught at the language boundary.
   */
  MDSOLVE_STATUS_PANIC = 5,
} MdsolveStatus;

/**
 * A completed run: the final state together with its summary.
 */
typedef struct MdsolveRun MdsolveRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse a configuration from text, run it and return a handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
MdsolveStatus mdsolve_run_config_text(const char *text, MdsolveRun **out);

/**
 * Parse a configuration file, run it and return a handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
MdsolveStatus mdsolve_run_config_file(const char *path, MdsolveRun **out);

/**
 * Release a run handle. A null handle is ignored.
 *
 * # Safety
 * `handle` must come from a `mdsolve_run_*` constructor and must not be
 * used afterwards.
 */
void mdsolve_run_free(MdsolveRun *handle);

/**
 * Number of timesteps taken.
 *
 * # Safety
 * `handle` must be a live run handle.
 */
uint64_t mdsolve_run_steps(const MdsolveRun *handle);

/**
 * Total Newton iterations across the run.
 *
 * # Safety
 * `handle` must be a live run handle.
 */
uint64_t mdsolve_run_newton_total(const MdsolveRun *handle);

/**
 * Total Krylov iterations across the run.
 *
 * # Safety
 * `handle` must be a live run handle.
 */
uint64_t mdsolve_run_gmres_total(const MdsolveRun *handle);

/**
 * Wallclock seconds of the run.
 *
 * # Safety
 * `handle` must be a live run handle.
 */
double mdsolve_run_wallclock_seconds(const MdsolveRun *handle);

/**
 * Number of per-variable error entries (0 when no reference solution
 * exists for the case).
 *
 * # Safety
 * `handle` must be a live run handle.
 */
uint64_t mdsolve_run_error_count(const MdsolveRun *handle);

/**
 * L2 error of one variable.
 *
 * # Safety
 * `handle` must be a live run handle and `out` a valid pointer.
 */
MdsolveStatus mdsolve_run_error(const MdsolveRun *handle, uint64_t index, double *out);

/**
 * Sum of the per-variable L2 errors.
 *
 * # Safety
 * `handle` must be a live run handle and `out` a valid pointer.
 */
MdsolveStatus mdsolve_run_error_sum(const MdsolveRun *handle, double *out);

/**
 * Length of the flat final-state array
 * (`elements x nodes x nodes x variables`).
 *
 * # Safety
 * `handle` must be a live run handle.
 */
uint64_t mdsolve_run_state_len(const MdsolveRun *handle);

/**
 * Copy the flat final state into a caller-provided buffer of length
 * `len`; fails unless `len` matches [`mdsolve_run_state_len`].
 *
 * # Safety
 * `handle` must be a live run handle and `buf` must point to at least
 * `len` doubles.
 */
MdsolveStatus mdsolve_run_state_copy(const MdsolveRun *handle, double *buf, uint64_t len);

/**
 * Run the built-in invariant checks; returns `Ok` when all pass.
 */
MdsolveStatus mdsolve_selftest(void);

/**
 * Copy the most recent error message for this thread into `buf`
 * (NUL-terminated, truncated to `len`); returns the full message length
 * excluding the terminator.
 *
 * # Safety
 * `buf` must point to at least `len` bytes, or be null to query the
 * length only.
 */
uint64_t mdsolve_last_error_message(char *buf, uint64_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mdsolve_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MDSOLVE_H */
