#include <math.h>
#include <stdio.h>

#include "millerpole.h"

int main(void) {
    MpTwoStageParams p = {1e-3, 1e6, 3e5, 1e-13, 1e-11, 1e-12, NAN};
    MpCircuit *c = NULL;
    if (mp_circuit_two_stage(&p, &c) != MP_STATUS_OK) return 1;
    MpComplex poles[4];
    size_t n = 0;
    if (mp_circuit_poles(c, MP_MODEL_ORACLE, poles, 4, &n) != MP_STATUS_OK || n != 2) return 2;
    MpSplit s;
    if (mp_circuit_split(c, &s) != MP_STATUS_OK) return 3;
    char *json = NULL;
    if (mp_circuit_analyze_json(c, false, 10.0, &json) != MP_STATUS_OK) return 4;
    mp_string_free(json);
    p.c2 = -1.0;
    MpCircuit *bad = NULL;
    if (mp_circuit_two_stage(&p, &bad) != MP_STATUS_INVALID_ARGUMENT || bad != NULL) return 5;
    printf("%s %zu %.6e %.6e %s\n", mp_version(), n, poles[0].re, s.p_cnd1.re, mp_last_error());
    mp_circuit_free(c);
    return 0;
}
