#include <stdio.h>
#include <string.h>
#include "bscrit.h"

int main(void) {
    int64_t num = 0, den = 0;
    if (bscrit_critical_order("2", "2", 1, 0, &num, &den) != BSCRIT_OK || num != -1 || den != 2) {
        return 10;
    }
    BscritTrace *trace = NULL;
    if (bscrit_derive("2", "2", "1", "1/2", 1, &trace) != BSCRIT_OK) {
        return 11;
    }
    if (bscrit_trace_replay(trace) != BSCRIT_OK) {
        return 12;
    }
    char *text = NULL;
    bscrit_trace_text(trace, &text);
    if (text == NULL || strstr(text, "ForcesEquality") == NULL) {
        return 13;
    }
    bscrit_string_free(text);
    bscrit_trace_free(trace);
    if (bscrit_config_parse("rho = 2", NULL) != BSCRIT_NULL_POINTER) {
        return 14;
    }
    BscritConfig *cfg = NULL;
    if (bscrit_config_parse("rho = 2", &cfg) != BSCRIT_CONFIG || bscrit_last_error() == NULL) {
        return 15;
    }
    printf("ok\n");
    return 0;
}
