#include <math.h>
#include <stdio.h>
#include "refprice.h"

int main(void) {
    RpMarket *m = NULL;
    if (rp_market_example(&m) != RP_STATUS_OK) return 1;
    RpSne s;
    if (rp_sne(m, &s) != RP_STATUS_OK) return 2;
    if (fabs(s.p1_star - 1.412688608488485) > 1e-12 || !s.interior) return 3;

    RpSchedule sched[2] = {{RP_SCHEDULE_KIND_POWER, 1.0, 1.0, 0.0}, {RP_SCHEDULE_KIND_POWER, 1.0, 1.0, 0.0}};
    double scales[2] = {1.0, 1.0};
    RpTrajectory *tr = NULL;
    if (rp_simulate(m, sched, scales, 1.0, 1.0, 1.5, 100, &tr) != RP_STATUS_OK) return 4;
    RpPeriod row;
    if (rp_trajectory_row(tr, rp_trajectory_len(tr) - 1, &row) != RP_STATUS_OK) return 5;
    if (fabs(row.p2 - s.p2_star) > 1e-6) return 6;

    double d;
    RpStatus st = rp_demand(m, 7, 1.0, 1.0, 1.0, &d);
    char buf[128];
    rp_last_error_message(buf, sizeof buf);
    printf("%s: %s\n", rp_status_name(st), buf);
    if (st != RP_STATUS_OUT_OF_RANGE) return 7;

    rp_trajectory_free(tr);
    rp_market_free(m);
    return 0;
}
