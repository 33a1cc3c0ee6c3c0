/* C interface to the cmdp solver: finite constrained total-cost decision
 * processes with a cemetery state.
 *
 * Conventions:
 *  - Fallible calls return a status code: 0 success, 2 infeasible,
 *    3 penalization assumption violated, 4 validation error, 5 numerical
 *    failure. These match the command-line tool's exit codes.
 *  - On failure, cmdp_last_error() returns a thread-local message that
 *    stays valid until the next failing call on the same thread.
 *  - Handles are created behind out-pointers and must be released exactly
 *    once with the matching _free function. Passing null to a _free
 *    function is a no-op.
 *  - Out-of-range indices return 0, NaN, or NULL (per return type); use
 *    the num_* accessors for bounds. Name pointers are borrowed from the
 *    handle and valid while it lives.
 *
 * This header is maintained by hand; a unit test in the implementation
 * crate checks that the declarations below match the exported symbols.
 */

#ifndef CMDP_H
#define CMDP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define CMDP_OK 0
#define CMDP_ERR_INFEASIBLE 2
#define CMDP_ERR_ASSUMPTION 3
#define CMDP_ERR_VALIDATION 4
#define CMDP_ERR_NUMERICAL 5

/* Opaque handles. */
typedef struct CmdpProblem CmdpProblem;
typedef struct CmdpSolution CmdpSolution;

/* Library version as a static NUL-terminated string. */
const char *cmdp_version(void);

/* Message of the most recent failure on this thread, or NULL. */
const char *cmdp_last_error(void);

/* Parse and validate a model document from NUL-terminated text. */
int cmdp_problem_parse(const char *text, CmdpProblem **out);

/* Read, parse, and validate a model file. */
int cmdp_problem_read(const char *path, CmdpProblem **out);

/* Release a problem handle. */
void cmdp_problem_free(CmdpProblem *problem);

/* Problem dimensions and names. Cost table 0 is the objective; constraint
 * bounds are indexed 1..=num_constraints, matching their cost tables. */
size_t cmdp_problem_num_states(const CmdpProblem *problem);
size_t cmdp_problem_num_actions(const CmdpProblem *problem, size_t state);
size_t cmdp_problem_num_costs(const CmdpProblem *problem);
size_t cmdp_problem_num_constraints(const CmdpProblem *problem);
size_t cmdp_problem_initial_state(const CmdpProblem *problem);
double cmdp_problem_bound(const CmdpProblem *problem, size_t j);
const char *cmdp_problem_state_name(const CmdpProblem *problem, size_t state);
const char *cmdp_problem_action_name(const CmdpProblem *problem, size_t state,
                                     size_t action);
const char *cmdp_problem_cost_name(const CmdpProblem *problem, size_t j);

/* Check the penalization assumption: CMDP_OK when it holds,
 * CMDP_ERR_ASSUMPTION when a reachable zero-cost end component exists
 * (described by cmdp_last_error()). */
int cmdp_check_assumption(const CmdpProblem *problem);

/* Minimize the objective subject to the cost bounds. On success, *out
 * receives a solution handle. skip_assumption_check != 0 proceeds past a
 * failing penalization check; tol_scale multiplies every internal
 * tolerance (pass 1.0 for the defaults). */
int cmdp_solve(const CmdpProblem *problem, int skip_assumption_check,
               double tol_scale, CmdpSolution **out);

/* Release a solution handle. */
void cmdp_solution_free(CmdpSolution *solution);

/* Achieved expected costs of the optimal mixture. */
double cmdp_solution_objective(const CmdpSolution *solution);
double cmdp_solution_cost(const CmdpSolution *solution, size_t j);

/* Optimal occupation measure, entry by state-action pair. */
double cmdp_solution_occupation(const CmdpSolution *solution, size_t state,
                                size_t action);

/* The mixture certificate: at most J+1 deterministic strategies. Each
 * component picks one action index per state; SIZE_MAX marks an
 * out-of-range query. cmdp_solution_is_fallback returns 1 when the
 * certificate exceeded the guaranteed component bound. */
size_t cmdp_solution_num_components(const CmdpSolution *solution);
double cmdp_solution_component_weight(const CmdpSolution *solution, size_t l);
size_t cmdp_solution_component_action(const CmdpSolution *solution, size_t l,
                                      size_t state);
int cmdp_solution_is_fallback(const CmdpSolution *solution);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CMDP_H */
