/* Copyright 2026 The mfgv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* The header compiles as C and the library is usable from C. */

#include <math.h>
#include <stdio.h>

#include "mfgv/mfgv.h"

int main(void) {
  const double x[] = {0.1, 0.9}, w[] = {0.5, 0.5}, y[] = {0.2}, one[] = {1.0};
  mfgv_measure *a = NULL, *b = NULL;
  double d = 0.0;
  if (mfgv_measure_create(1, 2, x, w, &a) != MFGV_OK || mfgv_measure_create(1, 1, y, one, &b) != MFGV_OK) {
    fprintf(stderr, "create: %s\n", mfgv_last_error());
    return 1;
  }
  if (mfgv_w1(a, b, &d) != MFGV_OK) return 1;
  mfgv_measure_free(a);
  mfgv_measure_free(b);
  /* 0.5 * 0.1 + 0.5 * 0.3 */
  if (fabs(d - 0.2) > 1e-12) {
    fprintf(stderr, "w1 = %.17g\n", d);
    return 1;
  }
  printf("c api ok\n");
  return 0;
}
