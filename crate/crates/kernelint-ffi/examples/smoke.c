#include <math.h>
#include <stdio.h>

#include "kernelint.h"

int main(void) {
    KiKernel *fbm = NULL;
    if (ki_kernel_new_fbm(0.75, &fbm) != KI_STATUS_OK) {
        fprintf(stderr, "fbm: %s\n", ki_last_error_message());
        return 1;
    }
    double sum = 0.0;
    if (ki_riemann_sum(fbm, KI_SCHEME_UNIFORM, KI_TAG_MIDPOINT, 0, 256, &sum) != KI_STATUS_OK) {
        return 1;
    }
    KiReport *report = NULL;
    if (ki_estimate_self_integral(fbm, 4096, 1e-3, 1, &report) != KI_STATUS_OK) {
        return 1;
    }
    KiVerdict verdict;
    double value = NAN;
    ki_report_verdict(report, &verdict);
    ki_report_value(report, &value);
    printf("sum %.6f verdict %d value %.6f\n", sum, (int)verdict, value);

    KiKernel *bad = NULL;
    KiStatus status = ki_kernel_new_fbm(0.25, &bad);
    printf("bad hurst status %d: %s\n", (int)status, ki_last_error_message());

    ki_report_free(report);
    ki_kernel_free(fbm);
    return verdict == KI_VERDICT_CONVERGED && fabs(value - 0.5) < 1e-3 && status == KI_STATUS_INVALID_ARGUMENT ? 0 : 2;
}
