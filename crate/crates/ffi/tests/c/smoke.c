#include <math.h>
#include <stdio.h>
#include "wbench.h"

#define CHECK(call)                                                     \
    do {                                                                \
        WbStatus s_ = (call);                                           \
        if (s_ != WB_STATUS_OK) {                                       \
            char msg[256];                                              \
            wb_last_error_message(msg, sizeof msg);                     \
            fprintf(stderr, "%s failed (%d): %s\n", #call, s_, msg);    \
            return 1;                                                   \
        }                                                               \
    } while (0)

int main(void) {
    WbState *w = NULL;
    WbHamiltonian *h = NULL;
    WbCalibration *cal = NULL;
    double energy = 0.0, p = 0.0;

    CHECK(wb_state_w(&w));
    CHECK(wb_hamiltonian_triangle(&h));
    CHECK(wb_hamiltonian_expectation(h, w, &energy));
    if (fabs(energy + 2.0) > 1e-12) {
        fprintf(stderr, "energy %f\n", energy);
        return 1;
    }

    CHECK(wb_calibration_bitflip(0.011, 3, &cal));
    CHECK(wb_calibration_estimate_p(cal, &p));
    if (fabs(p - 0.011) > 5e-4) {
        fprintf(stderr, "p %f\n", p);
        return 1;
    }

    if (wb_hamiltonian_ring(2, &h) != WB_STATUS_CONFIG) {
        return 1;
    }
    char msg[256];
    if (wb_last_error_message(msg, sizeof msg) == 0) {
        return 1;
    }

    wb_calibration_free(cal);
    wb_hamiltonian_free(h);
    wb_state_free(w);
    printf("ok %s\n", wb_version());
    return 0;
}
