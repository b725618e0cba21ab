#include <math.h>
#include <stdio.h>

#include "photonpress.h"

int main(void) {
    PpTemplate *t = NULL;
    if (pp_template_library("absorber-plate", &t) != PP_STATUS_OK) {
        return 10;
    }
    double omega[3] = {0.0, 0.0, 1.0};
    double f[3], tau[3];
    if (pp_estimate_force_torque(t, NULL, 0, omega, 1361.0, 2048, 3, f, tau) != PP_STATUS_OK) {
        return 11;
    }
    double want = -1361.0 / 299792458.0;
    if (fabs(f[2] - want) > 1e-2 * fabs(want)) {
        return 12;
    }
    pp_template_free(t);

    PpTemplate *bad = NULL;
    if (pp_template_library("nope", &bad) != PP_STATUS_INVALID_ARGUMENT || bad != NULL) {
        return 13;
    }
    char msg[256];
    if (pp_last_error_message(msg, sizeof msg) == 0) {
        return 14;
    }
    printf("%s %.6e\n", pp_version(), f[2]);
    return 0;
}
