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

#ifndef MFGV_VIABILITY_HPP_
#define MFGV_VIABILITY_HPP_

#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include "mfgv/gamedyn.hpp"
#include "mfgv/grid_function.hpp"
#include "mfgv/measures.hpp"
#include "mfgv/mfg.hpp"
#include "mfgv/model.hpp"
#include "mfgv/report.hpp"

namespace mfgv {

// -- value multifunctions ---------------------------------------------------

struct ValueSample {
  double t = 0.0;
  DiscreteMeasure m;
  std::vector<GridFunction> values;
};

/// Finite sample table (t, m) -> {phi} with bounds |phi| <= M, Lip <= C.
class ValueMultifunction {
 public:
  ValueMultifunction() = default;
  ValueMultifunction(double M, double C) : M_(M), C_(C) {}

  /// Graph of one solution: V(t_k, m(t_k)) = {V(t_k, .)}; M and C are the
  /// observed sup norm and Lipschitz constant.
  static ValueMultifunction from_solution(const MFGSolution& sol);

  /// Adds phi to the set at (t, m); an existing sample with the same time
  /// and a measure within W1 1e-12 is extended.
  void add(double t, const DiscreteMeasure& m, const GridFunction& phi);
  /// Adds the graph of sol and keeps sol as a source of stored steps.
  void add_solution(const MFGSolution& sol);

  double M() const { return M_; }
  double C() const { return C_; }
  void set_bounds(double M, double C) {
    M_ = M;
    C_ = C;
  }
  const std::vector<ValueSample>& samples() const { return samples_; }
  ValueSample& sample(std::size_t i) { return samples_.at(i); }

  /// Sample time closest to t (earlier one on ties); OutOfRange if empty.
  double nearest_time(double t) const;
  double last_time() const;
  /// Indices of samples at exactly the nearest sample time to t.
  std::vector<std::size_t> at_time(double t) const;

  struct Member {
    std::size_t sample = 0;
    double w1 = 0.0;  // W1 between the query and the sample measure
    double dt = 0.0;  // |t - sample time|
  };
  /// Nearest sample: match t first, then smallest W1.
  Member nearest(double t, const DiscreteMeasure& m) const;

  /// Smallest sup distance from psi to a member of V(r', mu') over samples
  /// at the time nearest r with W1(mu', mu) <= radius; +inf if none.
  double membership(double r, const DiscreteMeasure& mu, const GridFunction& psi,
                    double radius) const;

  /// Checks nonempty values, |phi| <= M and Lip(phi) <= C + slack.
  Report validate(double slack) const;

  /// Restrictions to [s, r] of every source solution passing within tol of
  /// (s, m, phi), relabelled to start from (m, phi). They are candidates
  /// only: callers still run psi_check on them.
  std::vector<PsiStep> stored_steps(double s, double r, const DiscreteMeasure& m,
                                    const GridFunction& phi, double tol) const;

 private:
  double M_ = std::numeric_limits<double>::infinity();
  double C_ = std::numeric_limits<double>::infinity();
  std::vector<ValueSample> samples_;
  std::vector<std::shared_ptr<const MFGSolution>> sources_;
};

// -- velocity plans -----------------------------------------------------------

/// (x + tau a, tau b) for every atom, forgetting the base z.
ExtendedMeasure shift_theta(const VelocityPlan& beta, double tau);

/// (x + tau a, z + tau b) for every atom.
ExtendedMeasure shift_xi(const VelocityPlan& gamma, double tau);

/// Straight paths w + (t - tau) v on uniform_times(tau, theta, steps).
PathMeasure linear_lift(const VelocityPlan& gamma, double tau, double theta, int steps = 1);

/// Difference quotients of every path between grid times s and r; the base
/// point is w(s) and the displacement is unwrapped along the path.
VelocityPlan finite_difference_plan(const PathMeasure& chi, double s, double r);

/// Plan with zero velocities on lift(m).
VelocityPlan zero_plan(const DiscreteMeasure& m);

/// int dist(v, F(t, x, m)) d beta.
double plan_infeasibility(const ModelSpec& model, const VelocityPlan& beta, double t,
                          const DiscreteMeasure& m);

/// max over atoms of max(|a|, |b|).
double plan_radius(const VelocityPlan& beta);

// -- viability ----------------------------------------------------------------

/// For every value at every sample at time s (or only `which`), searches a
/// step to time r (psi_generate over V's values near r, plus V's stored
/// steps) and reports whether some step ends inside V(r, .) within tol. Per-value checks are named
/// "sample<i>.value<j>"; their residual is the best candidate's violation.
Report viability_check(const ModelSpec& model, const ValueMultifunction& V, double s, double r,
                       double tol, const MfgOptions& options = {},
                       const std::vector<std::size_t>& which = {});

// -- set-valued derivative ------------------------------------------------------

struct DerivativeOptions {
  double c = 0.0;                 // support radius; 0 means the model's R
  std::vector<double> tau_seq;    // decreasing, positive
  double tol = 1e-2;              // acceptance of the fitted limits
  const VelocityPlan* seed = nullptr;  // optional extra candidate plan
  int max_sweeps = 8;             // alternations of lookup and plan update
};

struct DerivativeRecord {
  double tau = 0.0;
  double q = 0.0;          // |A phi_n - phi| / tau
  double p = 0.0;          // ([phi_n, nu_n] - [phi, lift m]) / tau
  double lookup_w1 = 0.0;  // W1(m_n, sample measure)
  double lookup_dt = 0.0;  // |t + tau - sample time|
};

struct DerivativeWitness {
  bool found = false;
  VelocityPlan beta;
  std::vector<DerivativeRecord> records;
  double q_limit = 0.0, p_limit = 0.0;  // linear-fit intercepts at tau = 0
  double infeasibility = 0.0;           // int dist(v, F) d beta
  double radius = 0.0;
};

/// Searches beta among per-atom mixtures of the mesh velocities of F(t, x, m),
/// the upper-hull points landing on lattice nodes after the smallest tau,
/// and the seed, with radius <= c. For fixed lookups the p-limit is
/// separable across atoms, so each atom takes its best candidate; lookups
/// are then refreshed until the plan is stable. `found` reports the
/// thresholds; the best plan is returned either way.
DerivativeWitness derivative_test(const ModelSpec& model, const ValueMultifunction& V, double t,
                                  const DiscreteMeasure& m, const GridFunction& phi,
                                  const DerivativeOptions& options);

// -- Euler chains ---------------------------------------------------------------

struct ChainOptions {
  MfgOptions mfg;       // sub-solves; steps is the total over [t*, T]
  double tol = 1e-6;    // step acceptance and membership radius
  double verify_tol = 1e-2;
  int lift_steps = 1;   // Euler steps per straight chord
};

struct ChainStep {
  double s = 0.0, r = 0.0;
  std::size_t candidate = 0;
  double bellman = 0.0;     // Psi-step residual sup |phi - B psi|
  double membership = 0.0;  // sup distance of psi to V(r, mu)
  double drift = 0.0;       // W1(chain slice, step end slice)
};

struct ChainResult {
  MFGSolution solution;     // paths are the straight chords of every step
  Report verify;            // verify_solution plus initial_value, initial_measure
  std::vector<ChainStep> steps;
  double backward = 0.0;    // |V_N(t*) - phi*|
  double action_gap = 0.0;  // [phi_N, eta_N] - [phi*, lift m*]
};

/// N Psi steps of equal length from (t*, m*, phi*) to the last sample time of
/// V, each chosen among psi_generate over V's values at the step end and V's
/// stored steps; the step's difference
/// quotient plan, with running-reward velocities refitted to F along each
/// chord, is lifted to straight chords and glued; V_N is the backward sweep
/// of sigma(., m_N(T)) along the chain's own grid. Throws ChainFailure when no
/// step is found and PreconditionViolation when V(T, m) != {sigma(., m)}.
ChainResult chain_solve(const ModelSpec& model, const ValueMultifunction& V, double t_star,
                        const DiscreteMeasure& m_star, const GridFunction& phi_star, int N,
                        const ChainOptions& options);

}  // namespace mfgv

#endif  // MFGV_VIABILITY_HPP_
