#ifndef STSP_H
#define STSP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes shared by every entry point.
 */
typedef enum StspStatus {
  STSP_STATUS_OK = 0,
  STSP_STATUS_NULL_POINTER = 1,
  STSP_STATUS_INVALID_UTF8 = 2,
  STSP_STATUS_PARSE = 3,
  STSP_STATUS_INVALID_ARGUMENT = 4,
  STSP_STATUS_MISSING_PAYLOAD = 5,
  STSP_STATUS_INFEASIBLE = 6,
  STSP_STATUS_BUDGET_EXHAUSTED = 7,
  STSP_STATUS_SIZE_GUARD = 8,
  STSP_STATUS_SOLVER = 9,
  STSP_STATUS_IO = 10,
  /*
   A Rust panic was caught at the boundary.
   */
  STSP_STATUS_INTERNAL = 11,
} StspStatus;

/*
 Parsed problem instance.
 */
typedef struct StspInstance StspInstance;

/*
 Outcome of a solve: status, objective and, when found, the walk.
 */
typedef struct StspSolution StspSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failure on this thread, or null. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *stsp_last_error(void);

/*
 Parses instance text and stores a new handle in `*out`.

 # Safety
 `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum StspStatus stsp_instance_parse(const char *text, struct StspInstance **out);

/*
 # Safety
 `inst` must come from [`stsp_instance_parse`] and not be freed twice.
 */
void stsp_instance_free(struct StspInstance *inst);

/*
 Node count, or 0 for a null handle.

 # Safety
 `inst` must be null or a live handle.
 */
size_t stsp_instance_node_count(const struct StspInstance *inst);

/*
 Edge count, or 0 for a null handle.

 # Safety
 `inst` must be null or a live handle.
 */
size_t stsp_instance_edge_count(const struct StspInstance *inst);

/*
 Solves `inst` with the formulation named by `tag` (for example `"SCF"`).
 `node_limit == 0` and `time_limit_secs <= 0` mean unlimited. A handle is
 stored in `*out` for optimal and budget-exhausted runs; the return value
 is `Ok` or `BudgetExhausted` respectively.

 # Safety
 `inst` must be a live handle, `tag` a NUL-terminated string and `out` writable.
 */
enum StspStatus stsp_solve(const struct StspInstance *inst,
                           const char *tag,
                           uint64_t node_limit,
                           double time_limit_secs,
                           struct StspSolution **out);

/*
 # Safety
 `sol` must come from [`stsp_solve`] and not be freed twice.
 */
void stsp_solution_free(struct StspSolution *sol);

/*
 Objective of the incumbent. Fails with `Infeasible` when there is none.

 # Safety
 `sol` must be a live handle and `out` writable.
 */
enum StspStatus stsp_solution_objective(const struct StspSolution *sol, double *out);

/*
 Copies the closed walk (1-based node labels) into `buf` and returns its
 full length; nothing is written past `cap`. Call with `cap == 0` to size
 the buffer.

 # Safety
 `sol` must be a live handle; `buf` must hold `cap` entries when `cap > 0`.
 */
size_t stsp_solution_walk(const struct StspSolution *sol, size_t *buf, size_t cap);

/*
 Copies edge multiplicities, in instance edge order, like [`stsp_solution_walk`].

 # Safety
 As for [`stsp_solution_walk`].
 */
size_t stsp_solution_edge_uses(const struct StspSolution *sol, uint32_t *buf, size_t cap);

/*
 The solve outcome as JSON; release with [`stsp_string_free`]. Null on failure.

 # Safety
 `sol` must be null or a live handle.
 */
char *stsp_solution_to_json(const struct StspSolution *sol);

/*
 # Safety
 `s` must come from this library and not be freed twice.
 */
void stsp_string_free(char *s);

/*
 Checks the solution's walk against the instance for its own problem.
 Returns `Ok` on success and `InvalidArgument` with a message otherwise.

 # Safety
 Both handles must be live.
 */
enum StspStatus stsp_verify(const struct StspInstance *inst, const struct StspSolution *sol);

/*
 Exact optimum by enumeration, for small instances only (`SizeGuard` otherwise).

 # Safety
 `inst` must be a live handle and `out` writable.
 */
enum StspStatus stsp_brute_force(const struct StspInstance *inst, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STSP_H */
