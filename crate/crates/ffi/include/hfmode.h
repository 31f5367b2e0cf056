#ifndef HFMODE_H
#define HFMODE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define HF_SCHEME_CENTRAL_DIFFERENCE 0

#define HF_SCHEME_NUMEROV 1

typedef enum HfStatus {
  HF_STATUS_OK = 0,
  HF_STATUS_NULL_POINTER = 1,
  HF_STATUS_INVALID_ARGUMENT = 2,
  HF_STATUS_SOLVER_FAILURE = 3,
  HF_STATUS_OUT_OF_RANGE = 4,
  HF_STATUS_PANIC = 5,
} HfStatus;

/**
 * Assembled operator together with the potential it came from.
 */
typedef struct HfOperator HfOperator;

/**
 * Top eigenpairs of an operator.
 */
typedef struct HfSpectrum HfSpectrum;

/**
 * Demodulated view of one mode.
 */
typedef struct HfModeSummary {
  size_t rank;
  double lambda;
  double delta_lambda;
  double tail_mass;
  double residual;
  size_t node_count;
  bool localized;
} HfModeSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Operator for `V(x) = amplitude * sech(width * x)` on the periodic grid
 * `x_min + n h`, `n < length / h`.
 *
 * # Safety
 * `out` must be null or point to writable storage for one pointer.
 */
enum HfStatus hf_operator_new_sech(double x_min,
                                   double length,
                                   double h,
                                   double amplitude,
                                   double width,
                                   uint32_t scheme,
                                   struct HfOperator **out);

/**
 * Operator for a potential given by its samples on the grid.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be null or
 * point to writable storage for one pointer.
 */
enum HfStatus hf_operator_new_tabulated(double x_min,
                                        double length,
                                        double h,
                                        const double *values,
                                        size_t len,
                                        uint32_t scheme,
                                        struct HfOperator **out);

/**
 * Number of grid points, or 0 for a null handle.
 *
 * # Safety
 * `op` must be null or a live handle from `hf_operator_new_*`.
 */
size_t hf_operator_len(const struct HfOperator *op);

/**
 * # Safety
 * `op` must be null or a live handle not used again afterwards.
 */
void hf_operator_free(struct HfOperator *op);

/**
 * The `k` largest certified eigenpairs, descending.
 *
 * # Safety
 * `op` must be a live handle; `out` must point to writable storage for one
 * pointer.
 */
enum HfStatus hf_top_k(const struct HfOperator *op, size_t k, struct HfSpectrum **out);

/**
 * Number of eigenpairs held, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle from `hf_top_k`.
 */
size_t hf_spectrum_len(const struct HfSpectrum *s);

/**
 * Eigenvalue at 1-based `rank`.
 *
 * # Safety
 * `s` must be a live handle; `out` must point to a writable double.
 */
enum HfStatus hf_spectrum_lambda(const struct HfSpectrum *s, size_t rank, double *out);

/**
 * Copies the eigenvector at `rank` into `buf`, which must hold exactly as
 * many doubles as the grid has points.
 *
 * # Safety
 * `s` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum HfStatus hf_spectrum_vector(const struct HfSpectrum *s, size_t rank, double *buf, size_t len);

/**
 * Demodulated summary of the mode at `rank`.
 *
 * # Safety
 * `s` must be a live handle; `out` must point to a writable summary.
 */
enum HfStatus hf_spectrum_mode(const struct HfSpectrum *s, size_t rank, struct HfModeSummary *out);

/**
 * Consecutive localized modes from the top of the spectrum.
 *
 * # Safety
 * `s` must be a live handle; `out` must point to a writable `size_t`.
 */
enum HfStatus hf_count_localized(const struct HfSpectrum *s, size_t *out);

/**
 * Bound states of the envelope problem for the operator's potential, on a
 * grid `refine` times finer. Writes the count to `count` and the first
 * `min(count, cap)` values of `Δλ`, descending, to `delta_lambda` (which may
 * be null when `cap` is 0).
 *
 * # Safety
 * `op` must be a live handle; `delta_lambda` must point to `cap` writable
 * doubles; `count` must point to a writable `size_t`.
 */
enum HfStatus hf_predict(const struct HfOperator *op,
                         size_t refine,
                         double *delta_lambda,
                         size_t cap,
                         size_t *count);

/**
 * # Safety
 * `s` must be null or a live handle not used again afterwards.
 */
void hf_spectrum_free(struct HfSpectrum *s);

/**
 * Message for the most recent failure on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *hf_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HFMODE_H */
