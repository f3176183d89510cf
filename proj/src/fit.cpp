// Copyright 2026 The mfgv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mfgv/fit.hpp"

#include <cmath>

#include "mfgv/error.hpp"

namespace mfgv {

std::vector<double> intercept_weights(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) throw InvalidArgument("intercept_weights: no points");
  double sx = 0.0, sxx = 0.0;
  for (double v : x) {
    sx += v;
    sxx += v * v;
  }
  const double det = static_cast<double>(n) * sxx - sx * sx;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  if (std::fabs(det) <= 1e-14 * std::max(1.0, sxx * static_cast<double>(n))) return w;
  for (std::size_t i = 0; i < n; ++i) w[i] = (sxx - x[i] * sx) / det;
  return w;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw InvalidArgument("linear_fit: bad sizes");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxx > 0.0 ? sxy * sxy / (sxx * syy) : 0.0) : 1.0;
  return f;
}

}  // namespace mfgv
