#ifndef SPARSE_PD_H
#define SPARSE_PD_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpdSetKind {
  SPD_SET_KIND_FULL_SPACE = 0,
  SPD_SET_KIND_NONNEG_ORTHANT = 1,
  SPD_SET_KIND_SIMPLEX = 2,
  SPD_SET_KIND_UNIT_SUM = 3,
  /**
   * `a` = p, `b` = radius.
   */
  SPD_SET_KIND_LP_BALL = 4,
  /**
   * `a` = lower, `b` = upper.
   */
  SPD_SET_KIND_BOX = 5,
} SpdSetKind;

typedef enum SpdStatus {
  SPD_STATUS_OK = 0,
  SPD_STATUS_NULL_POINTER = 1,
  SPD_STATUS_INVALID_ARGUMENT = 2,
  SPD_STATUS_INVALID_PROBLEM = 3,
  SPD_STATUS_CONFIG = 4,
  SPD_STATUS_IO = 5,
  SPD_STATUS_BUFFER_TOO_SMALL = 6,
  SPD_STATUS_PANIC = 7,
} SpdStatus;

typedef enum SpdTermination {
  SPD_TERMINATION_CONVERGED = 0,
  SPD_TERMINATION_BUDGET = 1,
  SPD_TERMINATION_STAGNATION = 2,
  SPD_TERMINATION_FAILED = 3,
} SpdTermination;

typedef struct SpdConfig SpdConfig;

typedef struct SpdProblem SpdProblem;

typedef struct SpdRecord SpdRecord;

/**
 * Objective value at `x` (length `n`).
 */
typedef double (*SpdValueFn)(const double *x, size_t n, void *user);

/**
 * Writes the gradient at `x` into `out` (both length `n`).
 */
typedef void (*SpdGradientFn)(const double *x, size_t n, double *out, void *user);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length.
 */
size_t spd_last_error(char *buf, size_t len);

/**
 * Static NUL-terminated version string.
 */
const char *spd_version(void);

struct SpdConfig *spd_config_new(void);

void spd_config_free(struct SpdConfig *cfg);

/**
 * Sets one configuration key, using the same names as the key = value files.
 */
enum SpdStatus spd_config_set(struct SpdConfig *cfg, const char *key, const char *value);

enum SpdStatus spd_config_load(const char *path, struct SpdConfig **out);

/**
 * Benchmark instance from a seed and a family name (`portfolio`, ...).
 */
enum SpdStatus spd_problem_generate(uint64_t seed, const char *family, struct SpdProblem **out);

/**
 * Problem JSON file as written by `sparse-pd generate`.
 */
enum SpdStatus spd_problem_load(const char *path, struct SpdProblem **out);

/**
 * Problem defined by C callbacks. `x0` (length `n`) is copied. The
 * callbacks and `user` must stay valid, and be callable from any thread,
 * until the problem is freed.
 */
enum SpdStatus spd_problem_from_callbacks(size_t n,
                                          size_t s,
                                          enum SpdSetKind set,
                                          double set_a,
                                          double set_b,
                                          const double *x0,
                                          SpdValueFn value,
                                          SpdGradientFn gradient,
                                          void *user,
                                          struct SpdProblem **out);

void spd_problem_free(struct SpdProblem *p);

/**
 * Dimension `n`, or 0 for a null handle.
 */
size_t spd_problem_dim(const struct SpdProblem *p);

size_t spd_problem_sparsity(const struct SpdProblem *p);

/**
 * Runs `solver` (`pdqn`, `iht`, `pss`, `gss`, `bfs`, `zcws`). A null
 * `cfg` uses the defaults.
 */
enum SpdStatus spd_solve(const struct SpdProblem *p,
                         const struct SpdConfig *cfg,
                         const char *solver,
                         struct SpdRecord **out);

void spd_record_free(struct SpdRecord *r);

/**
 * NaN for a null handle.
 */
double spd_record_f_best(const struct SpdRecord *r);

/**
 * Strong-stationarity residual of the best point; NaN for a null handle.
 */
double spd_record_rgs(const struct SpdRecord *r);

/**
 * Writes `nf`, `ng` and `nf + 2 ng`; any output pointer may be null.
 */
enum SpdStatus spd_record_counts(const struct SpdRecord *r,
                                 uint64_t *nf,
                                 uint64_t *ng,
                                 uint64_t *nf2g);

enum SpdTermination spd_record_termination(const struct SpdRecord *r);

/**
 * Copies the best point into `buf`, which must hold `n` entries.
 */
enum SpdStatus spd_record_x_best(const struct SpdRecord *r, double *buf, size_t len);

/**
 * Record as a JSON string; release with `spd_string_free`. Null on error.
 */
char *spd_record_json(const struct SpdRecord *r);

void spd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSE_PD_H */
