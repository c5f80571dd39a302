#ifndef SZASZ_H
#define SZASZ_H

#include <stdint.h>

// Default tail mass left outside each summation window.
#define SZ_DEFAULT_TAIL_TOL 1e-12

// Default Gauss-Legendre order for cell averages.
#define SZ_DEFAULT_QUAD_ORDER 8

typedef enum SzOperator {
  SZ_OPERATOR_BIVARIATE = 0,
  SZ_OPERATOR_GBS = 1,
  SZ_OPERATOR_KANTOROVICH = 2,
  SZ_OPERATOR_MFS = 3,
  SZ_OPERATOR_MFS_GBS = 4,
} SzOperator;

typedef enum SzStatus {
  SZ_STATUS_OK = 0,
  SZ_STATUS_NULL_POINTER = 1,
  SZ_STATUS_INVALID_UTF8 = 2,
  SZ_STATUS_INVALID_PARAMS = 3,
  SZ_STATUS_INVALID_INPUT = 4,
  SZ_STATUS_PARSE_ERROR = 5,
  SZ_STATUS_DOMAIN_ERROR = 6,
  SZ_STATUS_TRUNCATION_FAILURE = 7,
  SZ_STATUS_UNKNOWN_FUNCTION = 8,
  SZ_STATUS_UNSUPPORTED_ORDER = 9,
  SZ_STATUS_MISSING_METADATA = 10,
  SZ_STATUS_PANIC = 11,
} SzStatus;

// Opaque handle to a bivariate function.
typedef struct SzFunction SzFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parse an expression in `x` and `y` into a new handle.
//
// # Safety
// `source` must be a NUL-terminated string; `out` must be writable. The
// handle must be released with [`sz_function_free`].
enum SzStatus sz_function_parse(const char *source, struct SzFunction **out);

// Look up a catalog function by name into a new handle.
//
// # Safety
// As for [`sz_function_parse`].
enum SzStatus sz_function_catalog(const char *name, struct SzFunction **out);

// Release a handle. Null is ignored.
//
// # Safety
// `f` must be null or a handle not yet freed.
void sz_function_free(struct SzFunction *f);

// Evaluate the function itself at `(x, y)`.
//
// # Safety
// `f` must be a live handle and `out` writable.
enum SzStatus sz_function_eval(const struct SzFunction *f, double x, double y, double *out);

// Evaluate an operator at `(x, y)`; `op` is an `SzOperator` value.
//
// `a` is ignored by the classical operators and the quadrature order by all
// but the Kantorovich variant.
//
// # Safety
// `f` must be a live handle and `out` writable.
enum SzStatus sz_operator_eval(int32_t op,
                               const struct SzFunction *f,
                               uint32_t m,
                               uint32_t n,
                               double a,
                               double x,
                               double y,
                               double tail_tol,
                               uint32_t quad_order,
                               double *out);

// Closed-form moment `E[t^i s^j]`, or `E[(t-x)^i (s-y)^j]` when `centered` is nonzero.
//
// # Safety
// `out` must be writable.
enum SzStatus sz_moment_closed(uint32_t m,
                               uint32_t n,
                               double a,
                               double x,
                               double y,
                               uint32_t i,
                               uint32_t j,
                               int32_t centered,
                               double *out);

// The same moment by truncated summation.
//
// # Safety
// `out` must be writable.
enum SzStatus sz_moment_numeric(uint32_t m,
                                uint32_t n,
                                double a,
                                double x,
                                double y,
                                uint32_t i,
                                uint32_t j,
                                int32_t centered,
                                double tail_tol,
                                double *out);

// Message of the last failed call on this thread, or null after a success.
//
// The pointer stays valid until the next call into this library on the same thread.
const char *sz_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *sz_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SZASZ_H */
