#include <math.h>
#include <stdio.h>
#include "caustics.h"

#define CHECK(x) do { if ((x) != CAUSTICS_STATUS_OK) { \
    char msg[256]; caustics_last_error(msg, sizeof msg); \
    fprintf(stderr, "%s failed: %s\n", #x, msg); return 1; } } while (0)

int main(void) {
    CausticsChart *chart = NULL;
    CHECK(caustics_chart_from_json("{\"builder\": \"confocal_elliptic\", \"a\": 2, \"b\": 1}", &chart));
    double defect = 1.0;
    CHECK(caustics_ivory_defect(chart, 0.2, 0.8, -1.8, -1.2, &defect));
    if (!(defect < 1e-7)) { fprintf(stderr, "defect %g\n", defect); return 1; }

    CausticsCurve *circle = NULL;
    CHECK(caustics_curve_from_json("{\"shape\": {\"kind\": \"circle\", \"radius\": 1.0}}", NULL, &circle));
    double len = 0.0;
    CHECK(caustics_curve_length(circle, &len));
    if (fabs(len - 2.0 * M_PI) > 1e-9) { fprintf(stderr, "length %g\n", len); return 1; }

    if (caustics_curve_from_json("{\"shape\": 3}", NULL, &circle) != CAUSTICS_STATUS_CONFIGURATION) return 1;
    caustics_curve_free(circle);
    caustics_chart_free(chart);
    printf("ok %s\n", caustics_version());
    return 0;
}
