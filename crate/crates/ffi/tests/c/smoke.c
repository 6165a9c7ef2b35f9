#include <stdio.h>
#include <string.h>

#include "recirc.h"

static int fail(const char *what, RecircStatus st) {
    const char *msg = recirc_last_error();
    fprintf(stderr, "%s: status %d: %s\n", what, (int)st, msg ? msg : "(none)");
    return 1;
}

int main(void) {
    RecircScenario *s = NULL;
    RecircRun *run = NULL;
    double objective = 0.0;
    RecircStatus st;

    st = recirc_scenario_fixture("alloc_small", &s);
    if (st != RECIRC_STATUS_OK) return fail("fixture", st);
    st = recirc_run(s, RECIRC_MODE_FRAMEWORK, false, 0, &run);
    if (st != RECIRC_STATUS_OK) return fail("run", st);
    st = recirc_run_metric(run, "allocation_objective", &objective);
    if (st != RECIRC_STATUS_OK) return fail("metric", st);

    st = recirc_run_metric(run, "no_such_metric", &objective);
    if (st != RECIRC_STATUS_MISSING_METRIC) return fail("missing metric", st);
    if (recirc_last_error() == NULL || strstr(recirc_last_error(), "no_such_metric") == NULL) return 1;

    printf("%s %.6f\n", recirc_version(), objective);
    recirc_run_free(run);
    recirc_scenario_free(s);
    return 0;
}
