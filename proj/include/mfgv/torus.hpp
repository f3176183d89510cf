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

#ifndef MFGV_TORUS_HPP_
#define MFGV_TORUS_HPP_

#include <array>
#include <cstddef>
#include <span>

namespace mfgv {

inline constexpr int kMaxDim = 2;

/// Fixed-capacity real vector; only the first `dim` entries are meaningful.
using Coords = std::array<double, kMaxDim>;

/// Point of the flat torus R^d / Z^d with canonical coordinates in [0,1).
struct TorusPoint {
  int dim = 1;
  Coords c{};

  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
};

bool operator==(const TorusPoint& a, const TorusPoint& b);

/// Reduces a single coordinate into [0,1).
double wrap_coord(double v);

/// Canonical representative of v modulo Z^d. Throws InvalidArgument on
/// non-finite input or unsupported dimension.
TorusPoint wrap(std::span<const double> v);

/// Convenience constructors (inputs are wrapped).
TorusPoint torus_point(double x);
TorusPoint torus_point(double x, double y);

/// Quotient Euclidean distance: min over k in {-1,0,1}^d of |x - y + k|.
double torus_dist(const TorusPoint& x, const TorusPoint& y);

/// Shortest signed displacement d with wrap(from + d) == to, each
/// component in [-0.5, 0.5].
Coords displacement(const TorusPoint& from, const TorusPoint& to);

/// wrap(x + scale * v).
TorusPoint translate(const TorusPoint& x, const Coords& v, double scale = 1.0);

double norm(const Coords& v, int dim);

/// Uniform lattice with n points (i/n) per axis.
class TorusLattice {
 public:
  TorusLattice(int dim, int n);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double spacing() const { return 1.0 / n_; }
  std::size_t size() const;
  TorusPoint node(std::size_t flat) const;

 private:
  int dim_;
  int n_;
};

}  // namespace mfgv

#endif  // MFGV_TORUS_HPP_
