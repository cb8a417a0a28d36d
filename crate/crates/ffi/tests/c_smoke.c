#include <stdio.h>
#include <string.h>
#include "drc.h"

int main(void) {
    int64_t m[4] = {-2, 5, 3, 12};
    DrcDecomposition *d = NULL;
    if (drc_enumerate(4, 3, m, 4, &d) != DRC_STATUS_OK) {
        fprintf(stderr, "enumerate: %s\n", drc_last_error());
        return 1;
    }
    size_t n = 0;
    drc_decomposition_num_strata(d, &n);
    int64_t num = 0, den = 0;
    if (drc_decomposition_weight(d, n, &num, &den) != DRC_STATUS_INDEX_OUT_OF_RANGE) return 2;
    char *json = NULL;
    drc_decomposition_to_json(d, &json);
    DrcDecomposition *back = NULL;
    if (drc_archive_parse(json, &back) != DRC_STATUS_OK) return 3;
    drc_string_free(json);
    drc_decomposition_free(back);
    drc_decomposition_free(d);
    int64_t bad[2] = {3, -2};
    if (drc_enumerate(2, 1, bad, 2, &d) != DRC_STATUS_INPUT_ERROR || d != NULL) return 4;
    if (strstr(drc_last_error(), "discrepancy") == NULL) return 5;
    drc_step1_k_residue(2, -4, -1, &num, &den);
    printf("strata=%zu res=%lld/%lld version=%s\n", n, (long long)num, (long long)den, drc_version());
    return 0;
}
