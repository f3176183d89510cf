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

#ifndef MFGV_GRID_FUNCTION_HPP_
#define MFGV_GRID_FUNCTION_HPP_

#include <functional>
#include <vector>

#include "mfgv/torus.hpp"

namespace mfgv {

/// Real function on a periodic lattice, extended to T^d by multilinear
/// interpolation.
class GridFunction {
 public:
  /// Empty placeholder (size() == 0); evaluating it throws.
  GridFunction() : lattice_(1, 2) {}
  GridFunction(TorusLattice lattice, std::vector<double> values);

  static GridFunction constant(const TorusLattice& lattice, double c);
  static GridFunction sample(const TorusLattice& lattice,
                             const std::function<double(const TorusPoint&)>& fn);

  const TorusLattice& lattice() const { return lattice_; }
  int dim() const { return lattice_.dim(); }
  int n() const { return lattice_.n(); }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double node_value(std::size_t flat) const { return values_[flat]; }
  void set_node_value(std::size_t flat, double v) { values_[flat] = v; }

  /// Periodic multilinear interpolation. Points within 1e-9 lattice units of
  /// a node read the node value exactly.
  double operator()(const TorusPoint& x) const;

  /// Exact Lipschitz constant of the interpolant w.r.t. the torus metric.
  double lipschitz() const;
  double sup_norm() const;

  GridFunction plus(double c) const;

 private:
  TorusLattice lattice_;
  std::vector<double> values_;
};

/// max_i |a_i - b_i|; lattices must agree.
double sup_distance(const GridFunction& a, const GridFunction& b);

}  // namespace mfgv

#endif  // MFGV_GRID_FUNCTION_HPP_
