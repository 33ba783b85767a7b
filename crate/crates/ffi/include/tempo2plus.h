/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef TEMPO2PLUS_H
#define TEMPO2PLUS_H

#include <stdbool.h>
#include <stddef.h>

/**
 * Result of every fallible call.
 */
typedef enum {
  T2P_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  T2P_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument is not valid UTF-8.
   */
  T2P_STATUS_INVALID_UTF8 = 2,
  /**
   * The domain or problem could not be read.
   */
  T2P_STATUS_PARSE_ERROR = 3,
  /**
   * A plan could not be read or names an unknown action.
   */
  T2P_STATUS_PLAN_ERROR = 4,
  /**
   * The time quantum is not a positive number.
   */
  T2P_STATUS_INVALID_DELTA = 5,
  /**
   * Event completion did not terminate.
   */
  T2P_STATUS_DIVERGENCE = 6,
  /**
   * A PDDL+ plan has no temporal counterpart.
   */
  T2P_STATUS_LIFT_ERROR = 7,
  /**
   * The search hit its node budget.
   */
  T2P_STATUS_BUDGET_EXCEEDED = 8,
  /**
   * An internal error; the library state is unaffected.
   */
  T2P_STATUS_PANIC = 99,
} T2pStatus;

/**
 * Outcome of [`t2p_solve`] when it returns [`T2pStatus::Ok`].
 */
typedef enum {
  T2P_SOLVE_RESULT_FOUND = 0,
  T2P_SOLVE_RESULT_EXHAUSTED = 1,
} T2pSolveResult;

/**
 * A PDDL+ compilation of a temporal problem.
 */
typedef struct T2pCompilation T2pCompilation;

/**
 * A grounded temporal planning problem.
 */
typedef struct T2pProblem T2pProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into the library on this thread.
 */
const char *t2p_last_error(void);

/**
 * Library version as a static string.
 */
const char *t2p_version(void);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void t2p_string_free(char *s);

/**
 * Parses and grounds a temporal domain and problem given as PDDL text.
 *
 * # Safety
 * `domain` and `problem` must be NUL-terminated strings; `out` must be writable.
 */
T2pStatus t2p_problem_load(const char *domain, const char *problem, T2pProblem **out_problem);

/**
 * # Safety
 * `p` must be null or a live handle from [`t2p_problem_load`].
 */
void t2p_problem_free(T2pProblem *p);

/**
 * Counts of the problem's ground elements.
 *
 * # Safety
 * `p` must be a live problem handle; each out pointer may be null.
 */
T2pStatus t2p_problem_sizes(const T2pProblem *p,
                            size_t *out_fluents,
                            size_t *out_instant_actions,
                            size_t *out_durative_actions);

/**
 * Compiles a problem into PDDL+. The compilation keeps its own copy of the
 * problem, so `p` may be freed afterwards.
 *
 * # Safety
 * `p` must be a live problem handle; `out_compilation` must be writable.
 */
T2pStatus t2p_compile(const T2pProblem *p, bool expire_events, T2pCompilation **out_compilation);

/**
 * # Safety
 * `c` must be null or a live handle from [`t2p_compile`].
 */
void t2p_compilation_free(T2pCompilation *c);

/**
 * The compiled PDDL+ domain and problem text.
 *
 * # Safety
 * `c` must be a live compilation handle; both out pointers must be writable.
 */
T2pStatus t2p_compilation_pddl(const T2pCompilation *c, char **out_domain, char **out_problem);

/**
 * JSON map from compiled element and fluent names to their roles.
 *
 * # Safety
 * `c` must be a live compilation handle; `out_json` must be writable.
 */
T2pStatus t2p_compilation_name_map(const T2pCompilation *c, char **out_json);

/**
 * Validates a temporal plan (`t: (action args) [d]` lines). `out_report`
 * may be null; otherwise it receives a JSON report.
 *
 * # Safety
 * `p` must be a live problem handle, `plan` a NUL-terminated string and
 * `out_valid` writable.
 */
T2pStatus t2p_validate_temporal(const T2pProblem *p,
                                const char *plan,
                                bool *out_valid,
                                char **out_report);

/**
 * Validates a PDDL+ plan (with a `;; makespan t` line) against the
 * compilation under the discretized semantics with quantum `delta`.
 *
 * # Safety
 * `c` must be a live compilation handle, `plan` and `delta` NUL-terminated
 * strings and `out_valid` writable.
 */
T2pStatus t2p_validate_plus(const T2pCompilation *c,
                            const char *plan,
                            const char *delta,
                            bool *out_valid,
                            char **out_report);

/**
 * Translates a temporal plan into a PDDL+ plan and the quantum that
 * validates it. Invalid input plans are still lowered.
 *
 * # Safety
 * `c` must be a live compilation handle, `plan` a NUL-terminated string and
 * both out pointers writable.
 */
T2pStatus t2p_lower(const T2pCompilation *c, const char *plan, char **out_plan, char **out_delta);

/**
 * Translates a PDDL+ plan of the compilation back into a temporal plan.
 *
 * # Safety
 * `c` must be a live compilation handle, `plan` a NUL-terminated string and
 * `out_plan` writable.
 */
T2pStatus t2p_lift(const T2pCompilation *c, const char *plan, char **out_plan);

/**
 * Searches the compilation for a plan of at most `horizon` steps of
 * `delta`. `node_budget` 0 selects the default budget. On
 * [`T2pSolveResult::Found`], `out_plan` receives the PDDL+ plan and
 * `out_temporal_plan` (if not null) its temporal counterpart; otherwise
 * both are set to null.
 *
 * # Safety
 * `c` must be a live compilation handle, `delta` a NUL-terminated string,
 * `out_result` and `out_plan` writable.
 */
T2pStatus t2p_solve(const T2pCompilation *c,
                    const char *delta,
                    size_t horizon,
                    size_t node_budget,
                    T2pSolveResult *out_result,
                    char **out_plan,
                    char **out_temporal_plan);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEMPO2PLUS_H */
