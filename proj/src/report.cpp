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

#include "mfgv/report.hpp"

#include "mfgv/error.hpp"

namespace mfgv {

Check check_le(std::string name, double residual, double bound) {
  return {std::move(name), residual, bound, false, residual <= bound};
}

Check check_ge(std::string name, double residual, double bound) {
  return {std::move(name), residual, bound, true, residual >= bound};
}

bool Report::pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

void Report::append(const Report& other, const std::string& prefix) {
  for (Check c : other.checks) {
    c.name = prefix + c.name;
    checks.push_back(std::move(c));
  }
}

const Check& Report::at(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw OutOfRange("no check named '" + name + "'");
}

}  // namespace mfgv
