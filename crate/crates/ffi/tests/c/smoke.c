#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "solmin.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    SolminStatus s_ = (call);                                              \
    if (s_ != SOLMIN_STATUS_OK) {                                          \
      fprintf(stderr, "%s failed: %s (%s)\n", #call,                       \
              solmin_status_string(s_), solmin_last_error_message());      \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  SolminGrid grid = {2.0, 0.0, 3.0, 1.0, 65, 65};
  SolminGaussData *data = NULL;
  SolminImmersion *surface = NULL;
  CHECK(solmin_gauss_x2_plane(grid, 1.0, &data));
  CHECK(solmin_integrate(data, 1.0, -1.0, 0, &surface));

  size_t n = 0;
  CHECK(solmin_immersion_node_count(surface, &n));
  double *x1 = malloc(n * sizeof(double));
  double *x2 = malloc(n * sizeof(double));
  double *x3 = malloc(n * sizeof(double));
  CHECK(solmin_immersion_coords(surface, x1, x2, x3, n));
  for (size_t i = 0; i < n; i++) {
    if (x2[i] != 0.0) {
      fprintf(stderr, "x2 not constant at node %zu\n", i);
      return 1;
    }
  }

  double h = 1.0;
  CHECK(solmin_immersion_max_mean_curvature(surface, &h));
  if (!(h < 1e-8)) {
    fprintf(stderr, "max |H| = %g\n", h);
    return 1;
  }

  SolminStatus bad = solmin_integrate(NULL, 1.0, -1.0, 0, &surface);
  if (bad != SOLMIN_STATUS_NULL_POINTER) {
    fprintf(stderr, "expected null pointer status\n");
    return 1;
  }

  free(x1);
  free(x2);
  free(x3);
  solmin_immersion_free(surface);
  solmin_gauss_free(data);
  printf("smoke ok: %zu nodes, max |H| = %g\n", n, h);
  return 0;
}
