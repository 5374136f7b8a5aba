#ifndef QMOVES_H
#define QMOVES_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every exported function.
 */
typedef enum QmStatus {
  QM_STATUS_OK = 0,
  QM_STATUS_NULL_POINTER = 1,
  QM_STATUS_INVALID_ARGUMENT = 2,
  QM_STATUS_BOUND_VIOLATION = 3,
  QM_STATUS_IO = 4,
  QM_STATUS_ARCHIVE = 5,
  QM_STATUS_NUMERICAL = 6,
  QM_STATUS_PANIC = 7,
} QmStatus;

/**
 * A loaded solution archive.
 */
typedef struct QmArchive QmArchive;

/**
 * A state-transfer problem at a fixed duration.
 */
typedef struct QmProblem QmProblem;

/**
 * Outcome of a GRAPE run.
 */
typedef struct QmOptimizeResult {
  double fidelity;
  size_t iterations;
  double wall_s;
  /**
   * 0 target fidelity reached, 1 step converged, 2 budget exhausted, 3 stopped.
   */
  int32_t termination;
} QmOptimizeResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *qm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qm_version(void);

/**
 * Creates the problem of `level` ("bhw", "splitting" or "shakeup") at `duration_ms`.
 *
 * # Safety
 * `level` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QmStatus qm_problem_new(const char *level, double duration_ms, struct QmProblem **out);

/**
 * # Safety
 * `problem` must come from [`qm_problem_new`] and not be used afterwards. Null is ignored.
 */
void qm_problem_free(struct QmProblem *problem);

/**
 * Writes the number of time samples, control parameters and grid points, and δt in simulation units.
 *
 * # Safety
 * `problem` must be a live handle; output pointers may be null to skip them.
 */
enum QmStatus qm_problem_shape(const struct QmProblem *problem,
                               size_t *n_t,
                               size_t *n_params,
                               size_t *n_x,
                               double *dt);

/**
 * Bounds and the fixed first and last values of control parameter `param`.
 *
 * # Safety
 * `problem` must be a live handle; output pointers must be valid.
 */
enum QmStatus qm_problem_bounds(const struct QmProblem *problem,
                                size_t param,
                                double *lo,
                                double *hi,
                                double *start,
                                double *end);

/**
 * Fidelity of the control `values` (row-major, `len = n_params·n_t`).
 *
 * # Safety
 * `values` must point to `len` doubles and `fidelity` must be valid.
 */
enum QmStatus qm_evaluate_fidelity(const struct QmProblem *problem,
                                   const double *values,
                                   size_t len,
                                   double *fidelity);

/**
 * Runs GRAPE from `seed` and writes the optimized control to `out_values`.
 *
 * A non-positive `wall_budget` keeps the default; `max_iterations = 0` means no cap.
 *
 * # Safety
 * `seed` and `out_values` must each hold `len` doubles; `result` must be valid.
 */
enum QmStatus qm_grape_optimize(const struct QmProblem *problem,
                                const double *seed,
                                size_t len,
                                size_t max_iterations,
                                double wall_budget,
                                double *out_values,
                                struct QmOptimizeResult *result);

/**
 * Loads and verifies an archive file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QmStatus qm_archive_load(const char *path, struct QmArchive **out);

/**
 * # Safety
 * `archive` must come from [`qm_archive_load`] and not be used afterwards. Null is ignored.
 */
void qm_archive_free(struct QmArchive *archive);

/**
 * Number of records.
 *
 * # Safety
 * `archive` must be a live handle and `len` valid.
 */
enum QmStatus qm_archive_len(const struct QmArchive *archive, size_t *len);

/**
 * Duration in ms and fidelity of record `index`.
 *
 * # Safety
 * `archive` must be a live handle; output pointers must be valid.
 */
enum QmStatus qm_archive_record(const struct QmArchive *archive,
                                size_t index,
                                double *duration_ms,
                                double *fidelity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QMOVES_H */
