/*
 * C interface of the orbe shared library: robust MDP solving with
 * optimal-robust best-effort policy refinement, benchmark generation, and
 * the experiment matrix.
 *
 * Conventions:
 *  - Functions return 0 on success or a nonzero error code below; when an
 *    `err` out-parameter is supplied and an error occurs, *err receives a
 *    malloc'd message to release with orbe_string_free (it is set to NULL on
 *    success).
 *  - Returned strings (*out_json, *out_csv, *err) are heap-allocated and
 *    must be released with orbe_string_free.
 *  - Models are opaque handles released with orbe_model_free.
 *  - Structured inputs and outputs travel as JSON text; see the README for
 *    the schemas.
 */
#ifndef ORBE_C_H
#define ORBE_C_H

#ifdef __cplusplus
extern "C" {
#endif

/* Error codes. */
#define ORBE_OK 0                  /* success */
#define ORBE_ERR_VALIDATION 1      /* malformed model/config/policy input */
#define ORBE_ERR_NONCONVERGENCE 2  /* iteration budget exhausted */
#define ORBE_ERR_NUMERIC 3         /* linear algebra / LP / internal failure */
#define ORBE_ERR_INVALID_ARGUMENT 4 /* null pointer or malformed call */

typedef struct orbe_model orbe_model;

/* Library version as a static string (do not free). */
const char* orbe_version(void);

/* Releases a string returned through an out-parameter.  NULL is a no-op. */
void orbe_string_free(char* s);

/* Releases a model handle.  NULL is a no-op. */
void orbe_model_free(orbe_model* m);

/* Loads and validates a model file. */
int orbe_model_load(const char* path, orbe_model** out, char** err);

/* Parses and validates a model from JSON text. */
int orbe_model_from_json(const char* text, orbe_model** out, char** err);

/* Serializes a model back to JSON (indent < 0 means compact). */
int orbe_model_to_json(const orbe_model* m, int indent, char** out_json, char** err);

/* Writes the model to a file. */
int orbe_model_save(const orbe_model* m, const char* path, char** err);

/*
 * Generates a slippery-gridworld benchmark model.  config_json keys (all
 * optional): width, height, obstacles, nu, p, q_max, seed, variant
 * ("imdp"|"srect"), gamma.
 */
int orbe_gen_gridworld(const char* config_json, orbe_model** out, char** err);

/*
 * Robust value iteration.  options_json keys (all optional): epsilon,
 * max_iterations, adversary ("min"|"max"; default matches the model's
 * sense), include_worst_transition (bool).  Result JSON: robust_return,
 * value, policy, iterations, converged, oscillation_warning, adversary.
 * Returns ORBE_ERR_NONCONVERGENCE when the budget runs out unless
 * allow_nonconverged (bool) is set, in which case the partial result is
 * returned with converged=false.
 */
int orbe_solve(const orbe_model* m, const char* options_json, char** out_json, char** err);

/*
 * Runs the optimal-robust best-effort refinement.  options_json keys (all
 * optional): epsilon, max_iterations, tol (candidate tolerance; default ten
 * times epsilon), derivative_tolerance, perturbation_step.  Result JSON is
 * the refinement report: stage_reached, candidate_counts, policy,
 * robust_value, interior_condition, stage_seconds, and flags.
 */
int orbe_compute_orbe(const orbe_model* m, const char* options_json, char** out_json,
                      char** err);

/*
 * Evaluates one deterministic policy against the uncertainty.  policy_json:
 * {"policy": [[...] per state]}.  options_json keys: at ("worst"|"best",
 * default "worst"), epsilon, max_iterations.  Result JSON: return, value,
 * iterations, converged.
 */
int orbe_evaluate_policy(const orbe_model* m, const char* policy_json,
                         const char* options_json, char** out_json, char** err);

/*
 * Percentage of decision states whose policy action carries the generator's
 * best-effort tag (needs generator metadata in the model).
 */
int orbe_be_fraction(const orbe_model* m, const char* policy_json, double* out_pct,
                     char** err);

/*
 * Runs the benchmark experiment matrix and returns the CSV text.
 * config_json keys (all optional): sizes (array), nus (array), seeds,
 * seed_base, variant, gamma, p, q_max, obstacle_fraction, epsilon,
 * max_iterations, jobs.
 */
int orbe_bench(const char* config_json, char** out_csv, char** err);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ORBE_C_H */
