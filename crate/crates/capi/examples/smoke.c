#include <assert.h>
#include <math.h>
#include <stdio.h>
#include "cointoss.h"

int main(void) {
    CtWeight *w = NULL;
    assert(ct_weight_parse("geo:2", &w) == CT_STATUS_OK);

    double phi = 0.0;
    assert(ct_weight_phi(w, 3, &phi) == CT_STATUS_OK && phi == 0.125);

    CtTransformValue v;
    assert(ct_mu_hat(w, "100", 40, 2, &v) == CT_STATUS_OK);
    assert(sqrt(v.re * v.re + v.im * v.im) < 0.01);

    CtDecayConstants c;
    assert(ct_derive_constants(w, &c) == CT_STATUS_OK && c.case_tag == 2);

    bool pass = false;
    double floor = 0.0;
    assert(ct_rajchman_check(w, 3, 6, &floor, &pass) == CT_STATUS_OK && pass);

    CtStatus bad = ct_mu_hat(w, "oops", 40, 2, &v);
    char msg[128];
    ct_last_error_message(msg, sizeof msg);
    assert(bad == CT_STATUS_INVALID_ARGUMENT && msg[0] != 0);

    ct_weight_free(w);
    printf("C smoke test passed (%s)\n", ct_version());
    return 0;
}
