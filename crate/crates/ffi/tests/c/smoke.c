#include <stdio.h>
#include <string.h>

#include "tempo2plus.h"

static const char *DOMAIN =
    "(define (domain match-done) (:requirements :durative-actions)"
    " (:predicates (lit) (done))"
    " (:durative-action match :parameters () :duration (= ?duration 2) :condition (and)"
    "  :effect (and (at start (lit)) (at end (not (lit))) (at end (done)))))";
static const char *PROBLEM = "(define (problem p) (:domain match-done) (:init) (:goal (and (done) (not (lit)))))";

int main(void) {
    T2pProblem *problem = NULL;
    T2pCompilation *compilation = NULL;
    if (t2p_problem_load(DOMAIN, PROBLEM, &problem) != T2P_STATUS_OK) {
        fprintf(stderr, "load: %s\n", t2p_last_error());
        return 1;
    }
    if (t2p_compile(problem, true, &compilation) != T2P_STATUS_OK) return 2;
    t2p_problem_free(problem);

    T2pSolveResult result;
    char *plan = NULL, *temporal = NULL;
    if (t2p_solve(compilation, "1", 12, 0, &result, &plan, &temporal) != T2P_STATUS_OK) return 3;
    if (result != T2P_SOLVE_RESULT_FOUND || strstr(temporal, "(match) [2]") == NULL) return 4;
    printf("%s", temporal);

    bool valid = false;
    if (t2p_validate_plus(compilation, plan, "0", &valid, NULL) != T2P_STATUS_INVALID_DELTA) return 5;
    if (t2p_last_error() == NULL) return 6;

    t2p_string_free(plan);
    t2p_string_free(temporal);
    t2p_compilation_free(compilation);
    return 0;
}
