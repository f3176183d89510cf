/* Copyright 2026 The mfgv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the mfgv library. Objects are opaque handles released
 * with the matching _free function (NULL is accepted). Every function
 * returning mfgv_status leaves a message for mfgv_last_error() on failure;
 * the message is per thread and valid until the next failing call. */

#ifndef MFGV_MFGV_H_
#define MFGV_MFGV_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MFGV_API __declspec(dllexport)
#else
#define MFGV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfgv_status {
  MFGV_OK = 0,
  MFGV_ERR_INVALID_ARGUMENT = 1,
  MFGV_ERR_OUT_OF_RANGE = 2,
  MFGV_ERR_PRECONDITION = 3,
  MFGV_ERR_CONVERGENCE = 4,
  MFGV_ERR_CHAIN = 5,
  MFGV_ERR_NULL = 6,     /* required pointer argument was NULL */
  MFGV_ERR_INTERNAL = 7  /* unexpected exception */
} mfgv_status;

typedef struct mfgv_model mfgv_model;
typedef struct mfgv_measure mfgv_measure;
typedef struct mfgv_solution mfgv_solution;
typedef struct mfgv_report mfgv_report;

MFGV_API const char* mfgv_version(void);
MFGV_API const char* mfgv_status_name(mfgv_status status);
MFGV_API const char* mfgv_last_error(void);

/* -- models ---------------------------------------------------------------- */

MFGV_API size_t mfgv_preset_count(void);
/* NULL when i is out of range. */
MFGV_API const char* mfgv_preset_name(size_t i);
/* params_json: JSON object of numeric parameters, or NULL. */
MFGV_API mfgv_status mfgv_model_create(const char* preset, const char* params_json, mfgv_model** out);
MFGV_API void mfgv_model_free(mfgv_model* model);
MFGV_API mfgv_status mfgv_model_dim(const mfgv_model* model, int* dim);
/* Lipschitz constant L, speed bound R and plan radius c. */
MFGV_API mfgv_status mfgv_model_constants(const mfgv_model* model, double* L, double* R, double* c);

/* -- measures -------------------------------------------------------------- */

/* n atoms with row-major coordinates (n * dim) and nonnegative weights
 * summing to one; coordinates are wrapped into [0, 1). */
MFGV_API mfgv_status mfgv_measure_create(int dim, size_t n, const double* coords, const double* weights,
                                         mfgv_measure** out);
MFGV_API mfgv_status mfgv_measure_from_json(const char* json, mfgv_measure** out);
MFGV_API void mfgv_measure_free(mfgv_measure* m);
MFGV_API mfgv_status mfgv_measure_size(const mfgv_measure* m, size_t* n);
MFGV_API mfgv_status mfgv_w1(const mfgv_measure* a, const mfgv_measure* b, double* distance);
MFGV_API mfgv_status mfgv_torus_dist(int dim, const double* x, const double* y, double* distance);

/* -- equilibria ------------------------------------------------------------ */

typedef struct mfgv_solve_options {
  int lattice_n;
  int steps;
  double tol;  /* sup-in-time W1 between successive flows */
  int max_iter;
} mfgv_solve_options;

MFGV_API void mfgv_solve_options_default(mfgv_solve_options* options);
/* options may be NULL for the defaults. */
MFGV_API mfgv_status mfgv_solve(const mfgv_model* model, double t0, double T, const mfgv_measure* m0,
                                const mfgv_solve_options* options, mfgv_solution** out);
MFGV_API mfgv_status mfgv_solution_load(const char* dir, mfgv_solution** out);
MFGV_API mfgv_status mfgv_solution_save(const mfgv_solution* sol, const char* dir);
MFGV_API void mfgv_solution_free(mfgv_solution* sol);
MFGV_API mfgv_status mfgv_solution_info(const mfgv_solution* sol, size_t* num_times, size_t* num_nodes,
                                        double* flow_residual, double* gap, int* converged);
/* Copies V(t_k, .) (num_nodes values, row-major lattice order) into values. */
MFGV_API mfgv_status mfgv_solution_value(const mfgv_solution* sol, size_t k, double* values, size_t capacity);
MFGV_API mfgv_status mfgv_solution_time(const mfgv_solution* sol, size_t k, double* t);

/* -- reports --------------------------------------------------------------- */

MFGV_API mfgv_status mfgv_verify(const mfgv_model* model, const mfgv_solution* sol, double tol,
                                 mfgv_report** out);
MFGV_API void mfgv_report_free(mfgv_report* report);
MFGV_API size_t mfgv_report_size(const mfgv_report* report);
MFGV_API int mfgv_report_pass(const mfgv_report* report);
/* name stays valid while the report lives. */
MFGV_API mfgv_status mfgv_report_check(const mfgv_report* report, size_t i, const char** name,
                                       double* residual, double* bound, int* pass);
/* Writes the JSON array of checks (NUL-terminated) if capacity allows and
 * always stores the required size including the terminator in *needed. */
MFGV_API mfgv_status mfgv_report_json(const mfgv_report* report, char* buffer, size_t capacity,
                                      size_t* needed);

/* -- scenarios ------------------------------------------------------------- */

typedef struct mfgv_run_options {
  const char* out;             /* output directory override, or NULL */
  uint64_t seed;
  int has_seed;                /* nonzero: seed overrides the config */
  int threads;                 /* > 0 overrides the config */
  const char* overrides_json;  /* JSON merge patch applied to the config, or NULL */
} mfgv_run_options;

MFGV_API size_t mfgv_subcommand_count(void);
MFGV_API const char* mfgv_subcommand_name(size_t i);
/* Runs one subcommand of the scenario in config_path and stores the process
 * exit code in *exit_code: 0 all checks pass, 1 failed checks or runtime
 * error (report still written), 2 config error. Configuration problems are
 * reported through *exit_code and mfgv_last_error(), with MFGV_OK; the
 * status is an error only for unusable arguments. options may be NULL. */
MFGV_API mfgv_status mfgv_run(const char* subcommand, const char* config_path,
                              const mfgv_run_options* options, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif /* MFGV_MFGV_H_ */
