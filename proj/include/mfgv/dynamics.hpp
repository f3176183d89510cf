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

#ifndef MFGV_DYNAMICS_HPP_
#define MFGV_DYNAMICS_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include "mfgv/measures.hpp"
#include "mfgv/model.hpp"

namespace mfgv {

/// Per-step probability weights over the control set.
struct RelaxedControl {
  std::vector<std::vector<double>> weights;
  void validate(std::size_t num_controls) const;
};

/// Velocity together with the control mixture that realizes it.
struct Candidate {
  Velocity v;
  std::vector<double> weights;
};

/// Extremes (f, g)(u_k) followed by the non-pure points of the barycentric
/// mesh with `mesh` subdivisions; all lie in the convex hull of the extremes.
std::vector<Candidate> vectogram(const ModelSpec& model, double t, const TorusPoint& x,
                                 const Stats& m, int mesh);
std::vector<Candidate> vectogram(const ModelSpec& model, double t, const TorusPoint& x,
                                 const DiscreteMeasure& m, int mesh);

/// Euclidean distance in R^{dim+1} from v to co{points}; exact (projection
/// onto every face's affine hull, keeping feasible barycentric solutions).
double dist_to_hull(const Velocity& v, const std::vector<Velocity>& points, int dim);

double dist_to_vectogram(const ModelSpec& model, const Velocity& v, double t,
                         const TorusPoint& x, const Stats& m);

/// Candidate velocities for a step of length tau starting at x: the mesh
/// mixtures and, when lattice_n > 0 on T^1, every point of the upper hull
/// boundary whose landing point x + tau a is a lattice node. For a piecewise
/// linear payoff on that lattice the best candidate is the exact supremum
/// over the hull.
std::vector<Candidate> step_candidates(const std::vector<Velocity>& extremes,
                                       const std::vector<std::vector<double>>& mesh,
                                       const TorusPoint& x, double tau, int lattice_n);

/// Explicit Euler motion under a relaxed control: x(s) = y, z(s) = z0.
/// Stats are taken from flow slices at the nearest grid times.
Trajectory relaxed_trajectory(const ModelSpec& model, double s, double r,
                              const TorusPoint& y, const Flow& flow,
                              const RelaxedControl& xi, int steps, double z0 = 0.0);

/// Chooses mixture weights for atom `atom` at step `step`.
using SelectionPolicy = std::function<std::vector<double>(
    std::size_t atom, std::size_t step, double t, const TorusPoint& x, const Stats& m)>;

struct MfdiOptions {
  int steps = 32;
  int max_iter = 100;
  double tol = 1e-10;
  int max_splits = 3;
  const Flow* seed = nullptr;  // optional initial flow guess
};

struct MfdiResult {
  Flow flow;
  PathMeasure chi;
  int iterations = 0;   // Picard updates that moved the flow (at least 1)
  double residual = 0.0;
  std::vector<double> history;
  int splits = 0;       // horizon halvings performed
};

/// Picard iteration for the mean-field differential inclusion. Each atom of
/// nu0 gets one path; when the residual stalls the horizon is halved and the
/// halves are glued. Throws ConvergenceFailure after max_iter.
MfdiResult mfdi_solve(const ModelSpec& model, double s, double r,
                      const ExtendedMeasure& nu0, const SelectionPolicy& policy,
                      const MfdiOptions& options);

/// max_k dist((w_{k+1} - w_k) / dt, F(t_k, x_k, m(t_k))).
double verify_sol(const ModelSpec& model, const Trajectory& path,
                  const std::vector<double>& times, const std::vector<Stats>& stats);
double verify_sol(const ModelSpec& model, const Trajectory& path,
                  const std::vector<double>& times, const Flow& flow);

/// Largest verify_sol residual over the paths of chi against flow.
double verify_paths(const ModelSpec& model, const PathMeasure& chi, const Flow& flow);

/// Largest per-step speed max(|dx|, |dz|) / dt over all paths.
double max_speed(const PathMeasure& chi);

struct GluedPaths {
  PathMeasure chi;
  double residual = 0.0;  // feasibility against the glued object's own flow
};

GluedPaths concat_flows(const ModelSpec& model, const PathMeasure& chi1,
                        const PathMeasure& chi2);

/// max_k W1(e_k # chi, flow(k)) on a shared grid; slices with identical
/// atom lists count as zero without solving a transport problem.
double path_flow_mismatch(const PathMeasure& chi, const Flow& flow);

/// sup_k W1 between projected slices of two flows on the same grid.
double flow_distance(const Flow& a, const Flow& b);

}  // namespace mfgv

#endif  // MFGV_DYNAMICS_HPP_
