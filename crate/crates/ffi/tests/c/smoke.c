#include <stdio.h>
#include <string.h>

#include "parcheck.h"

static const char *SRC =
    "chart L (x, t) metric diag(1, 1)\n"
    "check schrodinger(exp(i*(2*x - 2*t))) on grid(-1..1, -1..1; 5) tol 1e-12 as wave_pass\n"
    "check schrodinger(exp(i*(2*x - 3*t))) on grid(-1..1, -1..1; 5) tol 1e-12 as wave_fail\n";

int main(void) {
    PcDocument *doc = NULL;
    if (pc_document_compile(SRC, &doc) != PC_STATUS_OK) {
        fprintf(stderr, "compile: %s\n", pc_last_error());
        return 10;
    }
    PcReport *report = NULL;
    if (pc_run(doc, 0.0, 0, 0, &report) != PC_STATUS_CHECK_FAILED) return 11;
    bool pass0 = false, pass1 = true;
    double linf = 0.0;
    if (pc_report_check_pass(report, 0, &pass0) != PC_STATUS_OK || !pass0) return 12;
    if (pc_report_check_pass(report, 1, &pass1) != PC_STATUS_OK || pass1) return 13;
    if (pc_report_check_linf(report, 1, &linf) != PC_STATUS_OK || linf < 0.99 || linf > 1.01) return 14;
    if (pc_report_check_pass(report, 2, &pass0) != PC_STATUS_OUT_OF_RANGE) return 15;
    char *json = pc_report_json(report);
    if (json == NULL || strstr(json, "\"wave_fail\"") == NULL) return 16;
    pc_string_free(json);
    pc_report_free(report);
    pc_document_free(doc);

    PcDocument *bad = NULL;
    if (pc_document_compile("field f = 2 +\n", &bad) != PC_STATUS_DIAGNOSTICS || bad != NULL) return 17;
    if (strstr(pc_last_error(), "line 1, col 12") == NULL) return 18;
    printf("ok %s\n", pc_version());
    return 0;
}
