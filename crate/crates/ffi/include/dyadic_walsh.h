#ifndef DYADIC_WALSH_H
#define DYADIC_WALSH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum DwStatus {
  DW_STATUS_OK = 0,
  DW_STATUS_NULL_POINTER = 1,
  DW_STATUS_INVALID_ARGUMENT = 2,
  DW_STATUS_DOMAIN = 3,
  DW_STATUS_OUT_OF_RANGE = 4,
  DW_STATUS_LEVEL_MISMATCH = 5,
  DW_STATUS_OVERFLOW = 6,
  DW_STATUS_NOT_EXACT = 7,
  DW_STATUS_SELECTION = 8,
  DW_STATUS_PARSE = 9,
  DW_STATUS_IO = 10,
  DW_STATUS_BUFFER_TOO_SMALL = 11,
  DW_STATUS_PANIC = 12,
} DwStatus;

// Opaque step function on `2^level` cells.
typedef struct DwStepFunction DwStepFunction;

// Binary functionals of an index.
typedef struct DwIndexExpansion {
  // `|n|`, position of the highest set bit.
  uint32_t order;
  // `⟨n⟩`, position of the lowest set bit.
  uint32_t low;
  // `d(n) = |n| - ⟨n⟩`.
  uint32_t gap;
  // `V(n)`.
  uint32_t variation;
} DwIndexExpansion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string.
// The pointer stays valid until the next library call on the same thread.
const char *dw_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *dw_version(void);

// Release a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void dw_string_free(char *s);

// Release a step function. Null is ignored.
//
// # Safety
// `f` must come from this library and not have been freed.
void dw_step_function_free(struct DwStepFunction *f);

// Float step function from `len = 2^level` values.
//
// # Safety
// `values` must point to `len` doubles; `out` must be writable.
enum DwStatus dw_step_function_from_values(uint32_t level,
                                           const double *values,
                                           size_t len,
                                           struct DwStepFunction **out);

// Parse a step function from its JSON file form.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum DwStatus dw_step_function_from_json(const char *json, struct DwStepFunction **out);

// JSON file form of a step function; free with [`dw_string_free`].
//
// # Safety
// `f` must be a live handle; `out` must be writable.
enum DwStatus dw_step_function_to_json(const struct DwStepFunction *f, char **out);

// # Safety
// `f` must be a live handle; `out` must be writable.
enum DwStatus dw_step_function_level(const struct DwStepFunction *f, uint32_t *out);

// Number of cells, `2^level`.
//
// # Safety
// `f` must be a live handle; `out` must be writable.
enum DwStatus dw_step_function_len(const struct DwStepFunction *f, size_t *out);

// 1 when the values are held exactly, 0 for floats.
//
// # Safety
// `f` must be a live handle; `out` must be writable.
enum DwStatus dw_step_function_is_exact(const struct DwStepFunction *f, int32_t *out);

// Copy the values as doubles into `buf`, which must hold `len` cells.
//
// # Safety
// `f` must be a live handle; `buf` must point to `len` writable doubles.
enum DwStatus dw_step_function_values_f64(const struct DwStepFunction *f, double *buf, size_t len);

// Dirichlet kernel `D_n` at `level`, exact.
//
// # Safety
// `out` must be writable.
enum DwStatus dw_dirichlet(uint64_t n, uint32_t level, struct DwStepFunction **out);

// Walsh function `w_n` at `level`, exact.
//
// # Safety
// `out` must be writable.
enum DwStatus dw_walsh(uint64_t n, uint32_t level, struct DwStepFunction **out);

// Partial sum `S_n f`, `0 ≤ n ≤ 2^level`.
//
// # Safety
// `f` must be a live handle; `out` must be writable.
enum DwStatus dw_partial_sum(const struct DwStepFunction *f,
                             uint64_t n,
                             struct DwStepFunction **out);

// Walsh–Fourier coefficients `f̂(0..2^level)` as doubles.
//
// # Safety
// `f` must be a live handle; `buf` must point to `len` writable doubles.
enum DwStatus dw_fwht_f64(const struct DwStepFunction *f, double *buf, size_t len);

// # Safety
// `f` must be a live handle; `out` must be writable.
enum DwStatus dw_lp_norm(const struct DwStepFunction *f, double p, double *out);

// # Safety
// `f` must be a live handle; `out` must be writable.
enum DwStatus dw_weak_lp_norm(const struct DwStepFunction *f, double p, double *out);

// `‖f‖_{H_p}` through the maximal function.
//
// # Safety
// `f` must be a live handle; `out` must be writable.
enum DwStatus dw_hp_norm(const struct DwStepFunction *f, double p, double *out);

// Lebesgue constant `L_S(n)`. `value` receives the double; if `exact` is not
// null it receives the exact value as `"a/2^b"`, to be freed with
// [`dw_string_free`].
//
// # Safety
// `value` must be writable; `exact` must be null or writable.
enum DwStatus dw_lebesgue_constant(uint64_t n, double *value, char **exact);

// # Safety
// `out` must be writable.
enum DwStatus dw_index_expand(uint64_t n, struct DwIndexExpansion *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYADIC_WALSH_H */
