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

#ifndef MFGV_LEMMAS_HPP_
#define MFGV_LEMMAS_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mfgv/grid_function.hpp"
#include "mfgv/measures.hpp"
#include "mfgv/mfg.hpp"
#include "mfgv/model.hpp"
#include "mfgv/report.hpp"
#include "mfgv/viability.hpp"

namespace mfgv {

// -- grid slack ---------------------------------------------------------------

/// eps_grid = c_interp (h + dt).
struct SlackModel {
  double c_interp = 0.0;
  double eps(double h, double dt) const { return c_interp * (h + dt); }
};

struct SlackLevel {
  int n = 0, steps = 0;
  double h = 0.0, dt = 0.0;
  double zero_error = 0.0;       // bellman_B on zero dynamics vs identity
  double hopf_lax_error = 0.0;   // bellman_B on pure motion vs max over the reach
};

struct SlackCalibration {
  SlackModel slack;
  std::vector<SlackLevel> levels;
};

/// Calibrates c_interp as the largest error / (h + dt) over three lattice
/// levels, on zero dynamics (exact identity) and on speed-limited motion
/// without running reward (exact Hopf-Lax value) with steps off the lattice.
SlackCalibration calibrate_slack();

// -- random instances -----------------------------------------------------------

/// Population flow t -> m(t).
using FlowFn = std::function<DiscreteMeasure(double)>;

/// Random smooth periodic function with a few cosine modes of amplitude
/// up to `scale`.
GridFunction random_payoff(const TorusLattice& lattice, std::mt19937_64& rng, double scale = 1.0,
                           int modes = 3);
/// Random measure with `atoms` atoms and weights in [0.1, 1] (normalized).
DiscreteMeasure random_measure(int dim, int atoms, std::mt19937_64& rng);
/// `atoms` distinct lattice nodes in random order (cycling when atoms
/// exceeds the lattice), equal weights, duplicates merged.
DiscreteMeasure random_lattice_measure(const TorusLattice& lattice, int atoms, std::mt19937_64& rng);
/// Atoms of m0 moving with constant velocities drawn from [-speed, speed]^d.
FlowFn moving_flow(const DiscreteMeasure& m0, double speed, std::mt19937_64& rng);
/// Model statistics of flow(t) at every time.
std::vector<Stats> flow_stats(const ModelSpec& model, const FlowFn& flow,
                              const std::vector<double>& times);

// -- properties -----------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct PropertyResult {
  Report report;
  Table table;
};

struct LemmaConfig {
  int lattice_n = 64;
  int steps = 32;           // time steps on [0, T]
  double T = 1.0;
  int instances = 50;
  int action_instances = 200;
  int atoms = 64;           // atoms of random population measures
  int semigroup_n0 = 32;    // coarsest lattice of the refinement study
  int semigroup_levels = 3;
  double min_order = 0.9;
  double min_r2 = 0.95;
  int necessity_pairs = 20;
  double action_tol = 1e-9;
  std::uint64_t seed = 1;
};

/// |[phi, nu] - [phi', nu']| <= ||phi - phi'|| + max(K, 1) W1(nu, nu') on
/// random instances, and equality on constructed instances (constant
/// offset plus a translation along a linear stretch of slope K).
PropertyResult action_continuity_property(const LemmaConfig& config);

/// ||B^{s,r} B^{r,theta} psi - B^{s,theta} psi|| under simultaneous halving
/// of h and dt: the direct sweep uses dt = 2h, the composition dt = h on
/// [s, r] and 4h on [r, theta]. Passes iff the fitted order is at least
/// config.min_order.
PropertyResult semigroup_property(const ModelSpec& model, const LemmaConfig& config);

/// Lipschitz constants of B outputs at every grid time and of frozen_A
/// outputs against (K + 1) e^{L(r - t)} - 1, and the time modulus
/// |V(s, y) - V(s', y)| <= R (K + 1) e^{L(r - max(s, s'))} |s - s'|.
PropertyResult lipschitz_property(const ModelSpec& model, const LemmaConfig& config,
                                  const SlackModel& slack);

/// Continuity of B in (r, m, psi), continuity of frozen_A in (s, m, psi),
/// the frozen-vs-flow comparison of A and B, and the decay of ||A - B||
/// as r -> s (log-log slope >= min_order with R^2 >= min_r2).
PropertyResult continuity_property(const ModelSpec& model, const LemmaConfig& config,
                                   const SlackModel& slack);

/// For restrictions [s, r] of an equilibrium: ||A^{s,r}_m V(r) - V(s)|| <=
/// (C + 1)(alpha(r - s) + 2LR(r - s))(r - s), the difference quotient plan
/// is within alpha(r - s) + 4LR(r - s) of F on average, its shift is the
/// slice at r, and [V(r), Theta# beta] >= [V(s), lift m(s)].
PropertyResult necessity_property(const ModelSpec& model, const MFGSolution& sol,
                                  const LemmaConfig& config, const SlackModel& slack);

/// Regression thresholds for Euler chains, fitted on the crowd preset at
/// desk scale and frozen.
struct ChainThresholds {
  double backward = 0.1;  // |V_N(t*) - phi*| <= backward / N
  double action = 0.01;   // action gap >= -action / N
};

/// Chain invariants: the accumulated per-step drift stays below
/// (t_j - t*)(alpha(tau) + 4 L R tau), the backward residual below
/// thresholds.backward / N and the action gap above -thresholds.action / N.
PropertyResult chain_property(const ModelSpec& model,
                              const std::vector<std::pair<int, ChainResult>>& chains,
                              const ChainThresholds& thresholds = {});

struct LemmaSuite {
  Report report;
  std::map<std::string, Table> tables;
  SlackCalibration calibration;
};

/// Every property above on `model` (the semigroup study also on drift-1d),
/// with necessity checked on `sol` if given, otherwise on a fresh
/// equilibrium from config.atoms random lattice atoms.
LemmaSuite run_lemmas(const ModelSpec& model, const LemmaConfig& config,
                      const MFGSolution* sol = nullptr);

}  // namespace mfgv

#endif  // MFGV_LEMMAS_HPP_
