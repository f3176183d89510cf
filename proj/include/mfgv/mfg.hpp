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

#ifndef MFGV_MFG_HPP_
#define MFGV_MFG_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "mfgv/bellman.hpp"
#include "mfgv/dynamics.hpp"
#include "mfgv/grid_function.hpp"
#include "mfgv/measures.hpp"
#include "mfgv/model.hpp"
#include "mfgv/report.hpp"

namespace mfgv {

enum class SolveMethod { kPicard, kFictitiousPlay };

/// Open-loop relaxed control played by a share of one initial atom.
struct Strategy {
  std::size_t atom = 0;
  RelaxedControl control;
  double weight = 0.0;  // absolute mass
};

struct MfgOptions {
  SolveMethod method = SolveMethod::kFictitiousPlay;
  int max_iter = 1000;
  double tol = 1e-3;          // sup_t W1 between successive flows
  int steps = 32;
  int lattice_n = 64;
  // After the main iteration, strategies are split across relaxed controls
  // until every played strategy has regret < refine_tol.
  bool refine = true;
  double refine_tol = 1e-9;
  int max_refine = 200;    // pricing rounds
  int max_moves = 20;      // linearization rounds per pricing round
  const GridFunction* terminal = nullptr;  // replaces sigma(., m(T)) when set
  const Flow* initial_guess = nullptr;     // default: m0 at every time
  MfdiOptions mfdi;                        // steps is taken from `steps`
};

struct MfgResiduals {
  double flow = 0.0;          // last sup_t W1 between successive iterates
  double refine_shift = 0.0;  // sup_t W1 moved by the refinement stage
  double max_regret = 0.0;    // max over played strategies of V(t0,x) - payoff
  double gap = 0.0;           // min_s [sigma, nu(T)] - [V(s), nu(s)]
  int iterations = 0;
  int refinements = 0;
  bool converged = false;
  std::vector<double> history;
};

struct MFGSolution {
  std::vector<double> times;
  std::vector<GridFunction> V;
  std::vector<DiscreteMeasure> m_flow;
  Flow nu_flow;
  PathMeasure chi;  // one path per strategy, in profile order
  DiscreteMeasure m0;
  std::vector<Strategy> profile;
  std::optional<GridFunction> fixed_terminal;
  MfgResiduals residuals;

  const TorusLattice& lattice() const { return V.front().lattice(); }
  double t0() const { return times.front(); }
  double T() const { return times.back(); }
};

/// sigma(., m) sampled on the lattice.
GridFunction terminal_payoff(const ModelSpec& model, const TorusLattice& lattice,
                             const DiscreteMeasure& m);

/// Equilibrium search on [t0, T]. Non-convergence is reported through
/// residuals.converged rather than thrown.
MFGSolution solve_mfg(const ModelSpec& model, double t0, double T, const DiscreteMeasure& m0,
                      const MfgOptions& options = {});

/// Checks: flow_consistency, bellman, action_gap, conservation, feasibility.
Report verify_solution(const ModelSpec& model, const MFGSolution& sol, double tol);

/// min over grid s of [psi, nu(T)] - [V(s), nu(s)].
double equilibrium_gap(const MFGSolution& sol, const GridFunction& psi);

}  // namespace mfgv

#endif  // MFGV_MFG_HPP_
