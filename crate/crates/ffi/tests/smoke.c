#include <stdio.h>
#include "bequest.h"

int main(void) {
    BqParams p;
    BqModel *m = NULL;
    double b, c1, v;
    char msg[128];

    if (bq_params_baseline(&p) != BQ_STATUS_OK) return 10;
    if (bq_model_new(&p, &m) != BQ_STATUS_OK) return 11;
    if (bq_predetermined_boundary(m, &b, &c1) != BQ_STATUS_OK) return 12;
    if (bq_predetermined_value(m, 1.0, 1.0, &v) != BQ_STATUS_OK) return 13;
    if (bq_predetermined_value(m, 1.0, -1.0, &v) == BQ_STATUS_OK) return 14;
    bq_last_error(msg, sizeof msg);
    printf("%.9g %.9g %s\n", b, c1, msg);
    bq_model_free(m);
    return 0;
}
