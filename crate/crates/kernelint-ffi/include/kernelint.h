#ifndef KERNELINT_H
#define KERNELINT_H

/* Generated by cbindgen from crates/kernelint-ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every call.
 */
typedef enum {
  KI_STATUS_OK = 0,
  KI_STATUS_NULL_ARGUMENT = 1,
  KI_STATUS_INVALID_ARGUMENT = 2,
  KI_STATUS_OUTSIDE_DOMAIN = 3,
  KI_STATUS_FACTORIZATION = 4,
  KI_STATUS_NOT_CONVERGED = 5,
  KI_STATUS_PARSE = 6,
  KI_STATUS_IO = 7,
  KI_STATUS_PANIC = 8,
} KiStatus;

typedef enum {
  KI_SCHEME_UNIFORM = 0,
  KI_SCHEME_DYADIC = 1,
  KI_SCHEME_RANDOM = 2,
  KI_SCHEME_ADVERSARIAL_GEOMETRIC = 3,
} KiScheme;

typedef enum {
  KI_TAG_LEFT = 0,
  KI_TAG_RIGHT = 1,
  KI_TAG_MIDPOINT = 2,
  KI_TAG_RANDOM = 3,
  KI_TAG_NEAR_RIGHT = 4,
} KiTag;

/*
 Self-integral verdict; values match the CLI exit codes.
 */
typedef enum {
  KI_VERDICT_CONVERGED = 0,
  KI_VERDICT_TAG_DEPENDENT = 2,
  KI_VERDICT_UNBOUNDED = 3,
} KiVerdict;

/*
 Opaque kernel handle.
 */
typedef struct KiKernel KiKernel;

/*
 Opaque self-integral report.
 */
typedef struct KiReport KiReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *ki_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ki_version(void);

/*
 Builds a kernel from a JSON spec such as `{"name":"fbm","hurst":0.75}`.

 # Safety
 `spec` must be a valid NUL-terminated string and `out` a writable pointer.
 */
KiStatus ki_kernel_new_from_json(const char *spec, KiKernel **out);

/*
 `K(x, A) = |A ∩ [0, x]|` on `[0, 1]`.

 # Safety
 `out` must be a writable pointer.
 */
KiStatus ki_kernel_new_brownian_wn(KiKernel **out);

/*
 Fractional Brownian motion kernel, `1/2 < hurst < 1`.

 # Safety
 `out` must be a writable pointer.
 */
KiStatus ki_kernel_new_fbm(double hurst, KiKernel **out);

/*
 Kernel with unbounded Riemann sums on `[-1, 1]`.

 # Safety
 `out` must be a writable pointer.
 */
KiStatus ki_kernel_new_singular(KiKernel **out);

/*
 # Safety
 `kernel` must be null or a handle from a `ki_kernel_new*` call not yet freed.
 */
void ki_kernel_free(KiKernel *kernel);

/*
 Closed domain of the kernel.

 # Safety
 `kernel` must be a live handle; `lo` and `hi` writable pointers.
 */
KiStatus ki_kernel_domain(const KiKernel *kernel, double *lo, double *hi);

/*
 `K(x, [a, b])` for a closed interval inside the domain.

 # Safety
 `kernel` must be a live handle and `out` a writable pointer.
 */
KiStatus ki_kernel_eval(const KiKernel *kernel, double x, double a, double b, double *out);

/*
 Kernel Riemann sum at level `n` of one system over the kernel domain.
 `seed` is used by the random scheme and random tags.

 # Safety
 `kernel` must be a live handle and `out` a writable pointer.
 */
KiStatus ki_riemann_sum(const KiKernel *kernel,
                        KiScheme scheme,
                        KiTag tag,
                        uint64_t seed,
                        size_t n,
                        double *out);

/*
 Self-integral verdict over the default twelve-system ensemble on the
 kernel domain, levels doubling up to `n_max`.

 # Safety
 `kernel` must be a live handle and `out` a writable pointer.
 */
KiStatus ki_estimate_self_integral(const KiKernel *kernel,
                                   size_t n_max,
                                   double tol,
                                   uint64_t seed,
                                   KiReport **out);

/*
 # Safety
 `report` must be a live handle and `out` a writable pointer.
 */
KiStatus ki_report_verdict(const KiReport *report, KiVerdict *out);

/*
 Converged value; [`KiStatus::NotConverged`] for other verdicts.

 # Safety
 `report` must be a live handle and `out` a writable pointer.
 */
KiStatus ki_report_value(const KiReport *report, double *out);

/*
 Report as a JSON string; release it with [`ki_string_free`].

 # Safety
 `report` must be a live handle and `out` a writable pointer.
 */
KiStatus ki_report_to_json(const KiReport *report, char **out);

/*
 # Safety
 `report` must be null or a handle from [`ki_estimate_self_integral`] not yet freed.
 */
void ki_report_free(KiReport *report);

/*
 # Safety
 `s` must be null or a string returned by this library and not yet freed.
 */
void ki_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KERNELINT_H */
