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

#ifndef MFGV_WASSERSTEIN_HPP_
#define MFGV_WASSERSTEIN_HPP_

#include <vector>

#include "mfgv/grid_function.hpp"
#include "mfgv/measures.hpp"

namespace mfgv {

/// Ground metric selector.
enum class Ground {
  kTorus,     // quotient Euclidean distance on T^d
  kExtended,  // ||x - x'|| + |z - z'|
  kPathSup,   // max over grid times of the extended distance
};

template <class P>
struct TransportResult {
  double distance = 0.0;
  Plan<P, P> plan;
};

/// Exact optimal transport between weight vectors a (rows) and b (columns)
/// for a dense cost matrix, by successive shortest paths with potentials.
/// Returns the flow matrix (row-major) and writes the optimal cost.
/// Ties are broken toward the lowest indices, so the plan is reproducible.
std::vector<double> solve_transport(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    const std::vector<double>& cost,
                                    double* total_cost);

double extended_dist(const ExtendedPoint& p, const ExtendedPoint& q);
double path_sup_dist(const Trajectory& p, const Trajectory& q);

TransportResult<TorusPoint> w1(const DiscreteMeasure& m1, const DiscreteMeasure& m2,
                               Ground ground = Ground::kTorus);
TransportResult<ExtendedPoint> w1(const ExtendedMeasure& m1,
                                  const ExtendedMeasure& m2,
                                  Ground ground = Ground::kExtended);
TransportResult<Trajectory> w1(const PathMeasure& c1, const PathMeasure& c2,
                               Ground ground = Ground::kPathSup);

/// W1 on T^1 by the closed form min_c int |F - G - c|; O(n log n).
double w1_circle(const DiscreteMeasure& m1, const DiscreteMeasure& m2);

/// Distance only. Uses the circle formula in one dimension and exact
/// transport otherwise.
double w1_distance(const DiscreteMeasure& m1, const DiscreteMeasure& m2);

/// int phi dm1 - int phi dm2 for a 1-Lipschitz phi (checked exactly on the
/// interpolant; PreconditionViolation otherwise).
double w1_dual_lower_bound(const DiscreteMeasure& m1, const DiscreteMeasure& m2,
                           const GridFunction& phi);

}  // namespace mfgv

#endif  // MFGV_WASSERSTEIN_HPP_
