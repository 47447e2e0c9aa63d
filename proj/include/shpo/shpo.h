/* C interface to the shpo library.
 *
 * Every function returns an shpo_status. On failure the message of the most
 * recent error on the calling thread is available from shpo_last_error().
 * Strings returned through char** out-parameters are owned by the caller
 * and must be released with shpo_string_free.
 */
#ifndef SHPO_H
#define SHPO_H

#include <stddef.h>
#include <stdint.h>

#if defined(SHPO_BUILDING)
#define SHPO_API __attribute__((visibility("default")))
#else
#define SHPO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum shpo_status {
    SHPO_OK = 0,
    SHPO_INVALID_ARGUMENT = 1,
    SHPO_DIMENSION_MISMATCH = 2,
    SHPO_PARTITION = 3,
    SHPO_LIMIT_EXCEEDED = 4,
    SHPO_PARSE = 5,
    SHPO_IO = 6,
    SHPO_INTERNAL = 7
} shpo_status;

typedef struct shpo_objective shpo_objective;

/* Overrides applied on top of a JSON config. Zero-initialise for none. */
typedef struct shpo_options {
    int has_seed;
    uint64_t seed;
    /* Worker count; 0 keeps the config's value. */
    unsigned parallel;
} shpo_options;

SHPO_API const char* shpo_version(void);
/* Thread-local; empty string when no error has occurred. */
SHPO_API const char* shpo_last_error(void);
SHPO_API void shpo_string_free(char* s);

/* Objective from an objective config ({"kind": "hierarchical", ...}). */
SHPO_API shpo_status shpo_objective_from_config(const char* config_json, shpo_objective** out);
/* Objective from a full spec as written by shpo_gen_objective. */
SHPO_API shpo_status shpo_objective_from_spec(const char* spec_json, shpo_objective** out);
SHPO_API void shpo_objective_destroy(shpo_objective* objective);
SHPO_API shpo_status shpo_objective_dimension(const shpo_objective* objective, size_t* out);
/* x holds n entries of +1 or -1. */
SHPO_API shpo_status shpo_objective_evaluate(const shpo_objective* objective, const int8_t* x, size_t n,
                                             uint64_t seed, int fidelity, double* out);
SHPO_API shpo_status shpo_objective_spec(const shpo_objective* objective, char** out);

/* The seed override replaces the optimizer seed. Writes evaluations.csv,
 * summary.json and, for staged runs, stages.json; returns summary.json. */
SHPO_API shpo_status shpo_run_experiment(const char* config_json, const char* out_dir, const shpo_options* options,
                                         char** summary_json);
/* Bare recovery. The seed override replaces the sampling seed. */
SHPO_API shpo_status shpo_recover(const char* config_json, const char* out_dir, const shpo_options* options,
                                  char** recovery_json);
/* The seed override replaces the sampling seed. Returns fit.json. */
SHPO_API shpo_status shpo_sweep_noise(const char* config_json, const char* out_dir, const shpo_options* options,
                                      char** fit_json);
/* *ok is set to 1 when every summary number matches the log. */
SHPO_API shpo_status shpo_verify(const char* out_dir, int* ok, char** report_json);
/* The seed override replaces the objective seed. Returns objective.json. */
SHPO_API shpo_status shpo_gen_objective(const char* config_json, const char* out_dir, const shpo_options* options,
                                        char** spec_json);

#ifdef __cplusplus
}
#endif

#endif
