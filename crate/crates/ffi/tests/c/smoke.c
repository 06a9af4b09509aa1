#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "tsp_edo.h"

#define CHECK(call)                                                      \
  do {                                                                   \
    EdoStatus s_ = (call);                                               \
    if (s_ != EDO_STATUS_OK) {                                           \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, edo_last_error()); \
      return 1;                                                          \
    }                                                                    \
  } while (0)

int main(void) {
  double lo, hi;
  CHECK(edo_bounds(100, 1000, 4, &lo, &hi));
  if (fabs(hi - 12.2061) > 0.005) return 2;

  EdoInstance *g = NULL;
  CHECK(edo_instance_unit(10, &g));
  EdoConfig cfg = edo_config_default(6, 2);
  cfg.seed = 7;
  EdoRun *run = NULL;
  CHECK(edo_run(g, &cfg, &run));
  EdoRunSummary sum;
  CHECK(edo_run_summary(run, &sum));
  if (sum.evals_to_hmax < 0 || fabs(sum.final_h - sum.h_max) > 1e-9) return 3;

  size_t tour[10];
  double cost;
  CHECK(edo_run_tour(run, 0, tour, 10, &cost));
  if (cost != 10.0) return 4;
  if (edo_run_tour(run, 99, tour, 10, NULL) != EDO_STATUS_OUT_OF_RANGE) return 5;
  if (edo_last_error() == NULL) return 6;

  edo_run_free(run);
  edo_instance_free(g);
  printf("ok %s H=%.6f\n", edo_version(), sum.final_h);
  return 0;
}
