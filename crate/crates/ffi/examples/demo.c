/* Recover the mass of two atoms through the packing sweep. */
#include <stdio.h>
#include "ballrecon.h"

int main(void) {
    BrMeasure *m = NULL;
    BrPremeasure *q = NULL;
    double a[2] = {0.2, 0.3}, b[2] = {0.7, 0.6};
    double lo[2] = {0.0, 0.0}, hi[2] = {1.0, 1.0};
    double deltas[3] = {0.2, 0.1, 0.05}, values[3], limit;
    bool exact;

    if (br_measure_new(2, &m) != BR_STATUS_OK) return 2;
    br_measure_add_atom(m, a, 2, 1.5);
    br_measure_add_atom(m, b, 2, 0.5);
    if (br_premeasure_new(m, BR_PREMEASURE_KIND_AVERAGED, &q) != BR_STATUS_OK) return 2;
    BrStatus s = br_packing_sweep(q, lo, hi, deltas, 3, values, &limit, &exact);
    if (s != BR_STATUS_OK) {
        fprintf(stderr, "%s\n", br_last_error());
        return 2;
    }
    printf("ballrecon %s: limit %.12f exact %d\n", br_version(), limit, (int)exact);
    if (br_measure_new(2, NULL) != BR_STATUS_NULL_POINTER) return 3;
    br_premeasure_free(q);
    br_measure_free(m);
    return (limit > 2.0 - 1e-9 && limit < 2.0 + 1e-9 && exact) ? 0 : 1;
}
