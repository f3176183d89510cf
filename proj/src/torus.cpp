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

#include "mfgv/torus.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mfgv/error.hpp"

namespace mfgv {

bool operator==(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim != b.dim) return false;
  for (int i = 0; i < a.dim; ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

double wrap_coord(double v) {
  double r = v - std::floor(v);
  // v slightly below an integer can round up to exactly 1.
  if (r >= 1.0) r = 0.0;
  return r;
}

TorusPoint wrap(std::span<const double> v) {
  if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) {
    throw InvalidArgument("wrap: dimension must be 1 or 2, got " +
                          std::to_string(v.size()));
  }
  TorusPoint p;
  p.dim = static_cast<int>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw InvalidArgument("wrap: non-finite input");
    p.c[i] = wrap_coord(v[i]);
  }
  return p;
}

TorusPoint torus_point(double x) {
  const double v[1] = {x};
  return wrap(v);
}

TorusPoint torus_point(double x, double y) {
  const double v[2] = {x, y};
  return wrap(v);
}

namespace {

double circle_gap(double a, double b) {
  double d = std::fabs(a - b);
  return d > 0.5 ? 1.0 - d : d;
}

}  // namespace

double torus_dist(const TorusPoint& x, const TorusPoint& y) {
  if (x.dim != y.dim) throw InvalidArgument("torus_dist: dimension mismatch");
  // Coordinates lie in [0,1), so the best shift per axis is independent and
  // the enumeration over {-1,0,1}^d collapses to a per-axis minimum.
  double s = 0.0;
  for (int i = 0; i < x.dim; ++i) {
    const double g = circle_gap(x[i], y[i]);
    s += g * g;
  }
  return std::sqrt(s);
}

Coords displacement(const TorusPoint& from, const TorusPoint& to) {
  if (from.dim != to.dim) {
    throw InvalidArgument("displacement: dimension mismatch");
  }
  Coords d{};
  for (int i = 0; i < from.dim; ++i) {
    double v = to[i] - from[i];
    v -= std::nearbyint(v);
    d[static_cast<std::size_t>(i)] = v;
  }
  return d;
}

TorusPoint translate(const TorusPoint& x, const Coords& v, double scale) {
  TorusPoint p = x;
  for (int i = 0; i < x.dim; ++i) {
    p[i] = wrap_coord(x[i] + scale * v[static_cast<std::size_t>(i)]);
  }
  return p;
}

double norm(const Coords& v, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
  return std::sqrt(s);
}

TorusLattice::TorusLattice(int dim, int n) : dim_(dim), n_(n) {
  if (dim < 1 || dim > kMaxDim) {
    throw InvalidArgument("TorusLattice: dimension must be 1 or 2");
  }
  if (n < 2) throw InvalidArgument("TorusLattice: need n >= 2");
}

std::size_t TorusLattice::size() const {
  std::size_t s = 1;
  for (int i = 0; i < dim_; ++i) s *= static_cast<std::size_t>(n_);
  return s;
}

TorusPoint TorusLattice::node(std::size_t flat) const {
  TorusPoint p;
  p.dim = dim_;
  const auto n = static_cast<std::size_t>(n_);
  // Row-major: the last axis varies fastest.
  for (int i = dim_ - 1; i >= 0; --i) {
    p[i] = static_cast<double>(flat % n) / static_cast<double>(n_);
    flat /= n;
  }
  return p;
}

}  // namespace mfgv
