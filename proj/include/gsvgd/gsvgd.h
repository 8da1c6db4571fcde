/*
 * C interface to the gsvgd particle inference library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a gsvgd_status; on
 * failure gsvgd_last_error() describes the problem (per thread, valid until
 * the next failing call on that thread). Matrices are dense, row-major.
 */
#ifndef GSVGD_GSVGD_H
#define GSVGD_GSVGD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(GSVGD_BUILDING)
#    define GSVGD_API __declspec(dllexport)
#  else
#    define GSVGD_API __declspec(dllimport)
#  endif
#else
#  define GSVGD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gsvgd_status {
  GSVGD_OK = 0,
  GSVGD_ERR_INVALID_ARGUMENT = 1, /* null pointer, bad enum value */
  GSVGD_ERR_DIMENSION = 2,
  GSVGD_ERR_DEGENERATE = 3,       /* rank-deficient retraction or batch */
  GSVGD_ERR_CONFIG = 4,
  GSVGD_ERR_DIVERGED = 5,         /* every repetition diverged */
  GSVGD_ERR_IO = 6,
  GSVGD_ERR_INTERNAL = 7
} gsvgd_status;

typedef enum gsvgd_kernel_family {
  GSVGD_KERNEL_GAUSSIAN_RBF = 0,
  GSVGD_KERNEL_IMQ = 1
} gsvgd_kernel_family;

typedef struct gsvgd_config gsvgd_config;
typedef struct gsvgd_result gsvgd_result;

GSVGD_API const char* gsvgd_version(void);
GSVGD_API const char* gsvgd_last_error(void);

/* Config ---------------------------------------------------------------- */

GSVGD_API gsvgd_status gsvgd_config_parse(const char* text, gsvgd_config** out);
GSVGD_API gsvgd_status gsvgd_config_load(const char* path, gsvgd_config** out);
GSVGD_API void gsvgd_config_free(gsvgd_config* config);

GSVGD_API gsvgd_status gsvgd_config_set_seed(gsvgd_config* config, uint64_t seed);
GSVGD_API gsvgd_status gsvgd_config_set_output(gsvgd_config* config, const char* dir);

/* Canonical `key = value` text. Writes at most `capacity` bytes including the
 * terminating NUL and stores the full length (without NUL) in *needed. */
GSVGD_API gsvgd_status gsvgd_config_echo(const gsvgd_config* config, char* buffer, size_t capacity,
                                         size_t* needed);

/* Experiments ------------------------------------------------------------ */

/* Runs every repetition and writes metrics.csv, summary.json, config.echo and
 * runs.json under the configured output directory. Returns GSVGD_ERR_DIVERGED
 * (with *out still set) only when all repetitions diverged. */
GSVGD_API gsvgd_status gsvgd_run_experiment(const gsvgd_config* config, gsvgd_result** out);
GSVGD_API void gsvgd_result_free(gsvgd_result* result);

GSVGD_API size_t gsvgd_result_repetitions(const gsvgd_result* result);
GSVGD_API size_t gsvgd_result_diverged(const gsvgd_result* result);
GSVGD_API size_t gsvgd_result_metric_count(const gsvgd_result* result);
/* Name and final-iteration mean / 95% CI of metric `index`. */
GSVGD_API gsvgd_status gsvgd_result_metric(const gsvgd_result* result, size_t index, const char** name,
                                           double* mean, double* ci_low, double* ci_high);

/* Invariant suite -------------------------------------------------------- */

typedef void (*gsvgd_check_callback)(const char* name, int passed, const char* detail, void* user);

/* Runs the built-in invariant/oracle checks on small instances, reporting each
 * through `callback` (may be NULL). Stores the number of failures. */
GSVGD_API gsvgd_status gsvgd_check(gsvgd_check_callback callback, void* user, size_t* failures);

/* Numerics --------------------------------------------------------------- */

/* V-form energy distance between x (n x d) and y (k x d). */
GSVGD_API gsvgd_status gsvgd_energy_distance(const double* x, size_t n, const double* y, size_t k, size_t d,
                                             double* out);

/* Projected KSD V-statistic for particles x and scores (both n x d) through
 * the d x m projector a. */
GSVGD_API gsvgd_status gsvgd_ksd_a(const double* x, const double* scores, size_t n, size_t d, const double* a,
                                   size_t m, gsvgd_kernel_family family, double sigma2, double* out);

/* Polar retraction of (a + delta), both d x m; writes d x m into out. */
GSVGD_API gsvgd_status gsvgd_polar_retract(const double* a, const double* delta, size_t d, size_t m,
                                           double* out);

#ifdef __cplusplus
}
#endif

#endif /* GSVGD_GSVGD_H */
