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

#include "mfgv/grid_function.hpp"

#include <algorithm>
#include <cmath>

#include "mfgv/error.hpp"

namespace mfgv {
namespace {

constexpr double kSnap = 1e-9;

// Splits a coordinate in [0,1) into a lower node index and a fraction.
void locate(double x, int n, int& i0, double& frac) {
  const double p = x * n;
  const double r = std::nearbyint(p);
  if (std::fabs(p - r) < kSnap) {
    i0 = static_cast<int>(r) % n;
    frac = 0.0;
    return;
  }
  const double fl = std::floor(p);
  i0 = static_cast<int>(fl) % n;
  frac = p - fl;
}

}  // namespace

GridFunction::GridFunction(TorusLattice lattice, std::vector<double> values)
    : lattice_(lattice), values_(std::move(values)) {
  if (values_.size() != lattice_.size()) {
    throw InvalidArgument("GridFunction: value count does not match lattice");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("GridFunction: non-finite value");
  }
}

GridFunction GridFunction::constant(const TorusLattice& lattice, double c) {
  return GridFunction(lattice, std::vector<double>(lattice.size(), c));
}

GridFunction GridFunction::sample(
    const TorusLattice& lattice,
    const std::function<double(const TorusPoint&)>& fn) {
  std::vector<double> v(lattice.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(lattice.node(i));
  return GridFunction(lattice, std::move(v));
}

double GridFunction::operator()(const TorusPoint& x) const {
  if (values_.empty()) throw InvalidArgument("GridFunction: empty");
  if (x.dim != dim()) throw InvalidArgument("GridFunction: dimension mismatch");
  const int n = lattice_.n();
  if (dim() == 1) {
    int i;
    double f;
    locate(x[0], n, i, f);
    if (f == 0.0) return values_[static_cast<std::size_t>(i)];
    const double a = values_[static_cast<std::size_t>(i)];
    const double b = values_[static_cast<std::size_t>((i + 1) % n)];
    return a + f * (b - a);
  }
  int i, j;
  double fx, fy;
  locate(x[0], n, i, fx);
  locate(x[1], n, j, fy);
  auto at = [&](int a, int b) {
    return values_[static_cast<std::size_t>((a % n) * n + (b % n))];
  };
  const double v00 = at(i, j);
  const double v10 = at(i + 1, j);
  const double v01 = at(i, j + 1);
  const double v11 = at(i + 1, j + 1);
  return (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 +
         (1 - fx) * fy * v01 + fx * fy * v11;
}

double GridFunction::lipschitz() const {
  const int n = lattice_.n();
  const double inv_h = n;
  double best = 0.0;
  if (dim() == 1) {
    for (int i = 0; i < n; ++i) {
      const double d = values_[static_cast<std::size_t>((i + 1) % n)] -
                       values_[static_cast<std::size_t>(i)];
      best = std::max(best, std::fabs(d) * inv_h);
    }
    return best;
  }
  // The gradient of a bilinear cell is affine along each axis, so its norm
  // peaks at a cell corner.
  auto at = [&](int a, int b) {
    return values_[static_cast<std::size_t>((a % n) * n + (b % n))];
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double sx0 = (at(i + 1, j) - at(i, j)) * inv_h;
      const double sx1 = (at(i + 1, j + 1) - at(i, j + 1)) * inv_h;
      const double sy0 = (at(i, j + 1) - at(i, j)) * inv_h;
      const double sy1 = (at(i + 1, j + 1) - at(i + 1, j)) * inv_h;
      for (double gx : {sx0, sx1}) {
        for (double gy : {sy0, sy1}) {
          best = std::max(best, std::hypot(gx, gy));
        }
      }
    }
  }
  return best;
}

double GridFunction::sup_norm() const {
  double best = 0.0;
  for (double v : values_) best = std::max(best, std::fabs(v));
  return best;
}

GridFunction GridFunction::plus(double c) const {
  std::vector<double> v = values_;
  for (double& x : v) x += c;
  return GridFunction(lattice_, std::move(v));
}

double sup_distance(const GridFunction& a, const GridFunction& b) {
  if (a.dim() != b.dim() || a.n() != b.n() || a.size() != b.size()) {
    throw InvalidArgument("sup_distance: lattice mismatch");
  }
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    best = std::max(best, std::fabs(a.node_value(i) - b.node_value(i)));
  }
  return best;
}

}  // namespace mfgv
