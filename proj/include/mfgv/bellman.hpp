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

#ifndef MFGV_BELLMAN_HPP_
#define MFGV_BELLMAN_HPP_

#include <vector>

#include "mfgv/dynamics.hpp"
#include "mfgv/grid_function.hpp"
#include "mfgv/measures.hpp"
#include "mfgv/model.hpp"

namespace mfgv {

/// Value functions V(t_k, .) of a backward sweep; values.back() is the
/// terminal payoff and values.front() is V(s, .).
struct BellmanResult {
  std::vector<double> times;
  std::vector<GridFunction> values;

  const GridFunction& initial() const { return values.front(); }
};

/// Semi-Lagrangian propagator:
///   V(t_k, x) = max over candidates of V(t_{k+1}, x + dt a) + dt b,
/// where candidates are the mixture mesh of F(t_k, x, m(t_k)) and, on T^1,
/// the lattice-crossing points of its upper hull (see step_candidates).
BellmanResult bellman_B(const ModelSpec& model, double s, double r, const Flow& flow,
                        const GridFunction& psi, int steps);

/// Same sweep with the population summary already known at each grid time.
BellmanResult bellman_B(const ModelSpec& model, const std::vector<double>& times,
                        const std::vector<Stats>& stats, const GridFunction& psi);

/// One frozen step: sup over F(s, x, m) of phi(x + (r-s) a) + (r-s) b.
GridFunction frozen_A(const ModelSpec& model, double s, double r, const Stats& m,
                      const GridFunction& phi);
GridFunction frozen_A(const ModelSpec& model, double s, double r, const DiscreteMeasure& m,
                      const GridFunction& phi);

struct Selection {
  Trajectory path;
  RelaxedControl control;
  double payoff = 0.0;        // psi(x(r)) + z(r) - z(s)
  double value_gap = 0.0;     // V(s, y) - payoff
  double conservation = 0.0;  // max_k |V(t_k, x_k) + z_k - V(s, y) - z(s)|
};

/// Greedy forward replay of a sweep from y: at every step the first
/// candidate attaining the maximum is taken.
Selection optimal_selection(const ModelSpec& model, const BellmanResult& sweep,
                            const std::vector<Stats>& stats, const TorusPoint& y,
                            double z0 = 0.0);
Selection optimal_selection(const ModelSpec& model, const BellmanResult& sweep,
                            const Flow& flow, const TorusPoint& y, double z0 = 0.0);

}  // namespace mfgv

#endif  // MFGV_BELLMAN_HPP_
