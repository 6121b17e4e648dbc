#ifndef CEXPR_H
#define CEXPR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `CEXPR_STATUS_OK` is zero.
 */
typedef enum CexprStatus {
  CEXPR_STATUS_OK = 0,
  CEXPR_STATUS_NULL_POINTER = 1,
  CEXPR_STATUS_INVALID_UTF8 = 2,
  CEXPR_STATUS_INVALID_INPUT = 3,
  CEXPR_STATUS_SINGULAR = 4,
  CEXPR_STATUS_EVALUATION = 5,
  CEXPR_STATUS_NOT_AN_ENGINE = 6,
  CEXPR_STATUS_OUT_OF_RANGE = 7,
  CEXPR_STATUS_BUFFER_TOO_SMALL = 8,
  CEXPR_STATUS_PANIC = 9,
} CexprStatus;

/**
 * Opaque handle to a resolved problem.
 */
typedef struct CexprProblem CexprProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and solves a JSON spec. On success `*out` receives a handle that
 * must be released with `cexpr_problem_free`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CexprStatus cexpr_problem_from_json(const char *json, struct CexprProblem **out);

/**
 * Like `cexpr_problem_from_json`, with an explicit seed for ensemble draws.
 *
 * # Safety
 * Same as `cexpr_problem_from_json`.
 */
enum CexprStatus cexpr_problem_from_json_seeded(const char *json,
                                                uint64_t seed,
                                                struct CexprProblem **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `problem` must come from this library and not be used afterwards.
 */
void cexpr_problem_free(struct CexprProblem *problem);

/**
 * Number of models in the problem (1 unless the spec is an ensemble).
 *
 * # Safety
 * `problem` must be a valid handle and `out` writable.
 */
enum CexprStatus cexpr_member_count(const struct CexprProblem *problem, size_t *out);

/**
 * Evaluates one sample row: the abscissa followed by every member's columns
 * up to `derivatives`, in the same order as the CLI's CSV output.
 *
 * # Safety
 * `problem` must be a valid handle; `buf` must hold `len` doubles.
 */
enum CexprStatus cexpr_sample_row(const struct CexprProblem *problem,
                                  double x,
                                  size_t derivatives,
                                  double *buf,
                                  size_t len,
                                  size_t *out_len);

/**
 * The `order`-th derivative of a scalar member at `x`.
 *
 * # Safety
 * `problem` must be a valid handle and `out` writable.
 */
enum CexprStatus cexpr_evaluate(const struct CexprProblem *problem,
                                size_t member_index,
                                double x,
                                size_t order,
                                double *out);

/**
 * Number of constraints of an engine member.
 *
 * # Safety
 * `problem` must be a valid handle and `out` writable.
 */
enum CexprStatus cexpr_constraint_count(const struct CexprProblem *problem,
                                        size_t member_index,
                                        size_t *out);

/**
 * Reciprocal condition number of an engine member's support matrix.
 *
 * # Safety
 * `problem` must be a valid handle and `out` writable.
 */
enum CexprStatus cexpr_rcond(const struct CexprProblem *problem, size_t member_index, double *out);

/**
 * The switching functions beta_k^(order)(x) of an engine member, one per
 * constraint.
 *
 * # Safety
 * `problem` must be a valid handle; `buf` must hold `len` doubles.
 */
enum CexprStatus cexpr_beta(const struct CexprProblem *problem,
                            size_t member_index,
                            double x,
                            size_t order,
                            double *buf,
                            size_t len,
                            size_t *out_len);

/**
 * Constraint residuals (value minus target) of an engine member.
 *
 * # Safety
 * `problem` must be a valid handle; `buf` must hold `len` doubles.
 */
enum CexprStatus cexpr_residuals(const struct CexprProblem *problem,
                                 size_t member_index,
                                 double *buf,
                                 size_t len,
                                 size_t *out_len);

/**
 * Checks every constraint of every member against `tolerance * scale`.
 * `*passed` is set to 1 when all checks pass and 0 otherwise.
 *
 * # Safety
 * `problem` must be a valid handle and `passed` writable.
 */
enum CexprStatus cexpr_verify(const struct CexprProblem *problem,
                              double tolerance,
                              int32_t *passed);

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *cexpr_last_error(void);

/**
 * Short description of a status code. The string is static.
 */
const char *cexpr_status_name(enum CexprStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CEXPR_H */
