#ifndef MMOT_H
#define MMOT_H

/* C interface to the multi-marginal transport toolkit.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Every fallible call returns an mmot_status; on failure a human-readable
 * message is available from mmot_last_error() (thread-local, valid until
 * the next failing call on the same thread). Out-parameters are written
 * only on MMOT_OK.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MMOT_BUILD_SHARED)
#define MMOT_API __declspec(dllexport)
#else
#define MMOT_API __declspec(dllimport)
#endif
#else
#define MMOT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mmot_status {
  MMOT_OK = 0,
  MMOT_ERROR_INVALID_ARGUMENT = 1,
  MMOT_ERROR_TOO_LARGE = 2,
  MMOT_ERROR_SOLVER_FAILURE = 3,
  MMOT_ERROR_GRADIENT_UNAVAILABLE = 4,
  MMOT_ERROR_INVALID_CERTIFICATE = 5,
  MMOT_ERROR_CONFIG = 6,
  MMOT_ERROR_IO = 7,
  MMOT_ERROR_INTERNAL = 8
} mmot_status;

typedef struct mmot_measure_s mmot_measure;
typedef struct mmot_cost_s mmot_cost;
typedef struct mmot_solution_s mmot_solution;

MMOT_API const char* mmot_version(void);
MMOT_API const char* mmot_last_error(void);

/* Releases a string returned by a *_to_json call. */
MMOT_API void mmot_string_free(char* s);

/* ---- measures ------------------------------------------------------- */

/* coords: size*dim doubles, atom-major; weights: size doubles (normalized
 * internally). */
MMOT_API mmot_status mmot_measure_create(const double* coords,
                                         const double* weights, size_t size,
                                         int dim, mmot_measure** out);

/* Seeded sampler over [0,1]^dim; random_weights 0 gives uniform weights. */
MMOT_API mmot_status mmot_measure_random(size_t size, int dim, uint64_t seed,
                                         int random_weights,
                                         mmot_measure** out);

MMOT_API mmot_status mmot_measure_from_json(const char* text,
                                            mmot_measure** out);
MMOT_API mmot_status mmot_measure_to_json(const mmot_measure* m, char** out);

MMOT_API size_t mmot_measure_size(const mmot_measure* m);
MMOT_API int mmot_measure_dim(const mmot_measure* m);
MMOT_API void mmot_measure_free(mmot_measure* m);

/* ---- costs ---------------------------------------------------------- */

/* id: "quadratic" | "product" | "two_level" | "cosine" | "zero". */
MMOT_API mmot_status mmot_cost_builtin(const char* id, size_t arity,
                                       mmot_cost** out);
MMOT_API mmot_status mmot_cost_from_json(const char* text, mmot_cost** out);
MMOT_API void mmot_cost_free(mmot_cost* c);

/* ---- exact solve ----------------------------------------------------- */

MMOT_API mmot_status mmot_solve_exact(const mmot_cost* cost,
                                      const mmot_measure* const* marginals,
                                      size_t n, mmot_solution** out);

MMOT_API mmot_status mmot_solution_certificate(const mmot_solution* s,
                                               double* primal, double* dual,
                                               double* gap,
                                               uint64_t* iterations,
                                               int* vertex);

MMOT_API size_t mmot_solution_plan_size(const mmot_solution* s);

/* Writes the k-th plan entry: n atom indices into idx plus its mass. */
MMOT_API mmot_status mmot_solution_plan_entry(const mmot_solution* s, size_t k,
                                              uint32_t* idx, double* mass);

/* Potential value of marginal axis (0-based) at the given atom. */
MMOT_API mmot_status mmot_solution_potential(const mmot_solution* s,
                                             size_t axis, size_t atom,
                                             double* value);

MMOT_API void mmot_solution_free(mmot_solution* s);

/* ---- scenario front-end ---------------------------------------------- */

/* Runs a scenario file; reports land under out_dir (NULL or "" selects
 * "<scenario stem>_out"). exit_code: 0 success, 2 inconsistent verdict.
 * Errors are reported through the returned status (CLI maps them to 1). */
MMOT_API mmot_status mmot_run_scenario(const char* scenario_path,
                                       const char* out_dir, int* exit_code);

/* Runs every *.json scenario in a directory with jobs parallel workers. */
MMOT_API mmot_status mmot_run_scenario_dir(const char* dir,
                                           const char* out_root, int jobs,
                                           int* exit_code);

MMOT_API mmot_status mmot_sweep_scenario(const char* scenario_path,
                                         const uint32_t* resolutions,
                                         size_t count, const char* out_dir,
                                         int* exit_code);

#ifdef __cplusplus
}
#endif

#endif /* MMOT_H */
