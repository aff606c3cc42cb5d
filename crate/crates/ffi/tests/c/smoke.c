#include <math.h>
#include <stdio.h>
#include <string.h>

#include "trilattice.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    double mid = 0.0, rad = 0.0;
    CHECK(tl_epstein_certified(0.0, 1.0, 6.0, 1e-8, &mid, &rad) == TL_STATUS_OK);
    CHECK(fabs(mid - 4.6589136) < 1e-6);

    double y_bar = 0.0, y_exact = 0.0;
    CHECK(tl_threshold(12.0, 6.0, 2, &y_bar, &y_exact) == TL_STATUS_OK);
    CHECK(y_bar == 7.52);

    CHECK(tl_epstein_certified(0.0, 1.0, 2.0, 1e-8, &mid, &rad) == TL_STATUS_INVALID_ARGUMENT);
    CHECK(strlen(tl_last_error()) > 0);

    TlCertifier *c = NULL;
    CHECK(tl_certifier_new(24.0, 6.0, &c) == TL_STATUS_OK);
    CHECK(tl_certifier_set_mode(c, TL_MODE_PAPER) == TL_STATUS_OK);
    CHECK(tl_certifier_set_delta(c, 0.05) == TL_STATUS_OK);
    CHECK(tl_certifier_set_truncation(c, 20) == TL_STATUS_OK);
    CHECK(tl_certifier_set_lipschitz(c, 33.0) == TL_STATUS_OK);
    CHECK(tl_certifier_set_workers(c, 1) == TL_STATUS_OK);
    TlReport *r = NULL;
    CHECK(tl_certifier_run(c, &r) == TL_STATUS_OK);
    bool verdict = false;
    CHECK(tl_report_verdict(r, &verdict) == TL_STATUS_OK);
    const char *json = tl_report_json(r);
    CHECK(json != NULL && strstr(json, "\"schema_version\"") != NULL);
    printf("version %s verdict %d\n", tl_version(), (int)verdict);
    tl_report_free(r);
    tl_certifier_free(c);
    return 0;
}
