#ifndef GCD_GCD_H
#define GCD_GCD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GCD_API __declspec(dllexport)
#else
#define GCD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; they double as CLI exit codes. */
#define GCD_OK 0
#define GCD_ERR_CONFIG 2
#define GCD_ERR_POSITIVITY 3
#define GCD_ERR_SOLVER 4
#define GCD_ERR_INTERNAL 5

typedef struct gcd_config gcd_config;
typedef struct gcd_trajectory gcd_trajectory;

GCD_API const char* gcd_version(void);

/* Message of the last failed call on this thread, or "". */
GCD_API const char* gcd_last_error(void);
/* Config key or variable named by the last failure, or "". */
GCD_API const char* gcd_last_error_key(void);

/* Strings returned through char** are owned by the caller. */
GCD_API void gcd_string_free(char* s);

GCD_API int gcd_config_preset(const char* name, gcd_config** out);
/* preset may be NULL; when given it replaces the document's "preset". */
GCD_API int gcd_config_parse(const char* json, const char* preset, gcd_config** out);
GCD_API int gcd_config_load(const char* path, const char* preset, gcd_config** out);
GCD_API void gcd_config_free(gcd_config* c);
GCD_API int gcd_config_set_param(gcd_config* c, const char* name, double value);
GCD_API int gcd_config_get_param(const gcd_config* c, const char* name, double* value);
GCD_API int gcd_config_set_seed(gcd_config* c, uint64_t seed);
GCD_API int gcd_config_set_parallelism(gcd_config* c, int n);
/* Expanded config as JSON and its FNV-1a hash. */
GCD_API int gcd_config_json(const gcd_config* c, char** out);
GCD_API int gcd_config_hash(const gcd_config* c, char** out);
GCD_API int gcd_config_seed(const gcd_config* c, uint64_t* seed);

/* Integrates the configured run. Returns GCD_OK for completed or converged
   runs and GCD_ERR_POSITIVITY / GCD_ERR_SOLVER for aborts; *out is set in
   all three cases. */
GCD_API int gcd_simulate(const gcd_config* c, gcd_trajectory** out);
GCD_API void gcd_trajectory_free(gcd_trajectory* t);
GCD_API size_t gcd_trajectory_samples(const gcd_trajectory* t);
/* "completed", "converged", "positivity_abort" or "solver_abort". */
GCD_API const char* gcd_trajectory_stop(const gcd_trajectory* t);
GCD_API double gcd_trajectory_stop_time(const gcd_trajectory* t);
GCD_API const char* gcd_trajectory_stop_detail(const gcd_trajectory* t);
GCD_API int gcd_trajectory_csv(const gcd_trajectory* t, char** out);

/* Fixed point seeded by the configured initial state, with its verification
   report. *all_pass may be NULL. */
GCD_API int gcd_stationary(const gcd_config* c, char** json, int* all_pass);
/* Jacobian at that fixed point, eigenvalues and zero-space report. */
GCD_API int gcd_jacobian(const gcd_config* c, char** json);
/* Classification grid as CSV. */
GCD_API int gcd_sweep(const gcd_config* c, char** csv);
GCD_API int gcd_sensitivity(const gcd_config* c, char** json);
GCD_API int gcd_global(const gcd_config* c, char** json);

/* Writes through a temporary file renamed into place. */
GCD_API int gcd_write_atomic(const char* path, const char* content);

/* SVG line chart of the named columns of a trajectory CSV. */
GCD_API int gcd_plot(const char* csv, const char* const* columns, size_t n_columns,
                     const char* title, char** svg);

#ifdef __cplusplus
}
#endif

#endif
