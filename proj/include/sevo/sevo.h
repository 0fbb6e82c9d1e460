#ifndef SEVO_H
#define SEVO_H

/* C interface of the sevo library. Every fallible call returns a sevo_status;
   on failure the message is available from sevo_last_error() on the same
   thread. Strings returned through char** are owned by the caller and are
   released with sevo_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SEVO_API __declspec(dllexport)
#else
#define SEVO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sevo_status {
  SEVO_OK = 0,
  SEVO_INVALID_ARGUMENT = 1,
  SEVO_SINGULAR_SYSTEM = 2,
  SEVO_CONDITIONS_UNMET = 3,
  SEVO_NOT_SUBCRITICAL = 4,
  SEVO_DOMAIN_ERROR = 5,
  SEVO_FIT_UNSTABLE = 6,
  SEVO_DATA_LEAKAGE = 7,
  SEVO_CONDITION_VIOLATED = 8,
  SEVO_INSUFFICIENT_SNAPSHOTS = 9,
  SEVO_EMPTY_WINDOW = 10,
  SEVO_NON_POSITIVE_VALUES = 11,
  SEVO_NO_BLOWUP_AT_CAP = 12,
  SEVO_BLOWUP_DURING_DECAY_EXPERIMENT = 13,
  SEVO_IO = 14,
  SEVO_USAGE = 15,
  SEVO_CANCELLED = 16,
  SEVO_INTERNAL = 99
} sevo_status;

typedef struct sevo_config sevo_config;
typedef struct sevo_result sevo_result;

SEVO_API const char* sevo_version(void);
SEVO_API const char* sevo_status_name(sevo_status status);
/* Message of the last failed call on this thread, "" if none. */
SEVO_API const char* sevo_last_error(void);
SEVO_API void sevo_string_free(char* s);

/* gamma must hold k doubles. */
SEVO_API sevo_status sevo_gamma(int n, double sigma, const double* p, size_t k, double* gamma);
SEVO_API sevo_status sevo_lifespan_exponent(int n, double sigma, const double* p, size_t k,
                                            double* exponent);
/* K0, K1 of the modal ODE u'' + (1 + a) u' + a u = 0 at time t. */
SEVO_API sevo_status sevo_propagator(double t, double a, double* k0, double* k1);

/* kind: exponents, kernels, simulate, decay, blowup, lifespan, testfunc, convergence. */
SEVO_API sevo_status sevo_config_new(const char* kind, sevo_config** out);
SEVO_API sevo_status sevo_config_from_json(const char* json, sevo_config** out);
SEVO_API sevo_status sevo_config_load(const char* path, sevo_config** out);
/* As sevo_config_load; a file without "kind" takes `kind`, a different one is SEVO_USAGE. */
SEVO_API sevo_status sevo_config_load_as(const char* path, const char* kind, sevo_config** out);
/* Dotted path, list entries by position (data.components.0.width); value is JSON or a bare string. */
SEVO_API sevo_status sevo_config_set(sevo_config* cfg, const char* path, const char* value);
SEVO_API sevo_status sevo_config_to_json(const sevo_config* cfg, char** json);
SEVO_API sevo_status sevo_config_hash(const sevo_config* cfg, uint64_t* hash);
SEVO_API void sevo_config_free(sevo_config* cfg);

/* Runs the configured experiment. A failed verdict is still SEVO_OK; check
   sevo_result_passed. write_files = 0 skips the output directory. */
SEVO_API sevo_status sevo_run(const sevo_config* cfg, int write_files, sevo_result** out);
SEVO_API int sevo_result_passed(const sevo_result* result);
SEVO_API int sevo_result_interrupted(const sevo_result* result);
SEVO_API sevo_status sevo_result_summary_json(const sevo_result* result, char** json);
SEVO_API sevo_status sevo_result_text(const sevo_result* result, char** text);
SEVO_API sevo_status sevo_result_output_dir(const sevo_result* result, char** path);
SEVO_API void sevo_result_free(sevo_result* result);

/* Async-signal-safe. */
SEVO_API void sevo_request_cancel(void);
SEVO_API void sevo_reset_cancel(void);
/* 0 means hardware concurrency. */
SEVO_API void sevo_set_max_threads(size_t n);

#ifdef __cplusplus
}
#endif

#endif
