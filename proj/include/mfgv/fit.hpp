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

#ifndef MFGV_FIT_HPP_
#define MFGV_FIT_HPP_

#include <vector>

namespace mfgv {

/// Least-squares line y = intercept + slope * x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 1.0;  // 1 when y is constant
};

/// Needs at least one point; a single point (or constant x) gives slope 0.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Weights w with intercept = sum_i w_i y_i for every y on the abscissae x.
std::vector<double> intercept_weights(const std::vector<double>& x);

}  // namespace mfgv

#endif  // MFGV_FIT_HPP_
