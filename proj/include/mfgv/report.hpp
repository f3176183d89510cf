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

#ifndef MFGV_REPORT_HPP_
#define MFGV_REPORT_HPP_

#include <string>
#include <vector>

namespace mfgv {

/// One named residual compared against a bound.
struct Check {
  std::string name;
  double residual = 0.0;
  double bound = 0.0;
  bool lower = false;  // true: pass iff residual >= bound
  bool pass = false;
};

/// residual <= bound (NaN fails).
Check check_le(std::string name, double residual, double bound);
/// residual >= bound (NaN fails).
Check check_ge(std::string name, double residual, double bound);

struct Report {
  std::vector<Check> checks;

  bool pass() const;
  void add(Check c) { checks.push_back(std::move(c)); }
  /// Appends other's checks with names prefixed by `prefix`.
  void append(const Report& other, const std::string& prefix = "");
  /// Throws OutOfRange for unknown names.
  const Check& at(const std::string& name) const;
};

}  // namespace mfgv

#endif  // MFGV_REPORT_HPP_
