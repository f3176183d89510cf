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

#ifndef MFGV_GAMEDYN_HPP_
#define MFGV_GAMEDYN_HPP_

#include <cstddef>
#include <utility>
#include <vector>

#include "mfgv/grid_function.hpp"
#include "mfgv/measures.hpp"
#include "mfgv/mfg.hpp"
#include "mfgv/model.hpp"
#include "mfgv/report.hpp"

namespace mfgv {

/// One step (m, phi) -> (mu, psi) of the game dynamics on [s, r] together
/// with its witnesses: the flow nu and the paths chi carrying it.
struct PsiStep {
  double s = 0.0, r = 0.0;
  DiscreteMeasure m, mu;
  GridFunction phi, psi;
  Flow nu_flow;
  PathMeasure chi;
  Report residuals;  // filled by the generators
};

/// r = s: constant paths from lift(m), psi = phi.
PsiStep trivial_step(double s, const DiscreteMeasure& m, const GridFunction& phi);

/// Restriction of a solution to its grid times in [s, r], with
/// phi = V(s, .) and psi = V(r, .).
PsiStep restrict_solution(const MFGSolution& sol, double s, double r);

/// Checks: feasibility (paths solve the inclusion and carry nu), endpoints
/// (W1 of the end slices to m and mu), bellman (sup |phi - B psi|) and
/// action ([psi, nu(r)] - [phi, nu(s)] >= -tol). Malformed steps yield NaN
/// residuals.
Report psi_check(const ModelSpec& model, const PsiStep& step, double tol);

struct PsiGeneration {
  std::vector<PsiStep> tried;          // one per candidate, with residuals
  std::vector<PsiStep> steps;          // accepted, in candidate order
  std::vector<std::size_t> accepted;   // candidate index of each step
  std::vector<double> bellman;         // per candidate sup |phi - B psi|
  std::vector<double> action;          // per candidate action difference
};

/// For every candidate psi, solves the game on [s, r] from m with terminal
/// payoff psi and keeps the step if it passes psi_check at tol. Only
/// `options.steps`, the MFDI settings and the solver tolerances are taken
/// from `options`; the lattice is that of the candidate.
PsiGeneration psi_generate(const ModelSpec& model, double s, double r, const DiscreteMeasure& m,
                           const GridFunction& phi, const std::vector<GridFunction>& candidates,
                           double tol, const MfgOptions& options = {});

/// Glues two steps at their shared time: the second step's initial rewards
/// are re-drawn from the first step's end slice, then paths are spliced.
/// Throws PreconditionViolation if the times, measures (W1) or payoffs
/// (sup norm) at the joint differ by more than tol.
PsiStep compose_steps(const ModelSpec& model, const PsiStep& first, const PsiStep& second,
                      double tol);

/// psi_check of compose_steps(first, second).
Report psi_compose_check(const ModelSpec& model, const PsiStep& first, const PsiStep& second,
                         double tol);

/// Splits a step at the grid time nearest to t: the intermediate payoff is
/// B^{t,r} psi along the step's own flow.
std::pair<PsiStep, PsiStep> split_step(const ModelSpec& model, const PsiStep& step, double t);

}  // namespace mfgv

#endif  // MFGV_GAMEDYN_HPP_
