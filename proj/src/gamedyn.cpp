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

#include "mfgv/gamedyn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfgv/bellman.hpp"
#include "mfgv/dynamics.hpp"
#include "mfgv/error.hpp"
#include "mfgv/parallel.hpp"
#include "mfgv/wasserstein.hpp"

namespace mfgv {
namespace {

constexpr double kTimeTol = 1e-9;

bool well_formed(const PsiStep& st) {
  const auto& times = st.nu_flow.times();
  if (times.empty() || st.chi.times.size() != times.size() || st.chi.atoms.empty()) return false;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::fabs(st.chi.times[k] - times[k]) > kTimeTol) return false;
  }
  return std::fabs(times.front() - st.s) <= kTimeTol && std::fabs(times.back() - st.r) <= kTimeTol &&
         !st.m.empty() && !st.mu.empty() && st.phi.size() > 0 && st.psi.size() > 0;
}

// B^{t_k, r} psi along the step's flow for every grid time t_k.
BellmanResult backward(const ModelSpec& model, const PsiStep& st) {
  const auto& times = st.nu_flow.times();
  if (times.size() == 1) return {times, {st.psi}};
  return bellman_B(model, times, summarize_flow(model, st.nu_flow), st.psi);
}

}  // namespace

PsiStep trivial_step(double s, const DiscreteMeasure& m, const GridFunction& phi) {
  validate(m);
  PsiStep st;
  st.s = st.r = s;
  st.m = st.mu = m;
  st.phi = st.psi = phi;
  st.chi.times = {s};
  for (const auto& a : m.atoms) st.chi.atoms.push_back({Trajectory{{a.point, 0.0}}, a.weight});
  st.nu_flow = Flow::from_paths(st.chi);
  return st;
}

PsiStep restrict_solution(const MFGSolution& sol, double s, double r) {
  if (!(r >= s)) throw InvalidArgument("restrict_solution: need s <= r");
  const std::size_t i = nearest_time_index(sol.times, s), j = nearest_time_index(sol.times, r);
  PsiStep st;
  st.s = sol.times[i];
  st.r = sol.times[j];
  st.m = sol.m_flow[i];
  st.mu = sol.m_flow[j];
  st.phi = sol.V[i];
  st.psi = sol.V[j];
  st.nu_flow = sol.nu_flow.restrict(st.s, st.r);
  st.chi = restrict_paths(sol.chi, st.s, st.r);
  return st;
}

Report psi_check(const ModelSpec& model, const PsiStep& st, double tol) {
  Report rep;
  if (!well_formed(st)) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const char* n : {"feasibility", "endpoints", "bellman"}) rep.add(check_le(n, nan, tol));
    rep.add(check_ge("action", nan, -tol));
    return rep;
  }
  const std::size_t last = st.nu_flow.size() - 1;
  const double feas = std::max(verify_paths(model, st.chi, st.nu_flow),
                               path_flow_mismatch(st.chi, st.nu_flow));
  rep.add(check_le("feasibility", feas, tol));
  const double ends = std::max(w1_distance(st.nu_flow.projected(0), st.m),
                               w1_distance(st.nu_flow.projected(last), st.mu));
  rep.add(check_le("endpoints", ends, tol));
  rep.add(check_le("bellman", sup_distance(st.phi, backward(model, st).initial()), tol));
  rep.add(check_ge("action",
                   action(st.psi, st.nu_flow.extended(last)) - action(st.phi, st.nu_flow.extended(0)),
                   -tol));
  return rep;
}

PsiGeneration psi_generate(const ModelSpec& model, double s, double r, const DiscreteMeasure& m,
                           const GridFunction& phi, const std::vector<GridFunction>& candidates,
                           double tol, const MfgOptions& options) {
  validate(m);
  if (!(r >= s)) throw InvalidArgument("psi_generate: need s <= r");
  const std::size_t n = candidates.size();
  std::vector<PsiStep> steps(n);
  parallel_for(n, [&](std::size_t c) {
    const GridFunction& psi = candidates[c];
    if (r == s) {
      steps[c] = trivial_step(s, m, phi);
      steps[c].psi = psi;
    } else {
      MfgOptions o = options;
      o.terminal = &psi;
      o.lattice_n = psi.n();
      o.initial_guess = nullptr;
      const MFGSolution sol = solve_mfg(model, s, r, m, o);
      PsiStep& st = steps[c];
      st.s = s;
      st.r = r;
      st.m = m;
      st.mu = sol.m_flow.back();
      st.phi = phi;
      st.psi = psi;
      st.nu_flow = sol.nu_flow;
      st.chi = sol.chi;
    }
    steps[c].residuals = psi_check(model, steps[c], tol);
  });
  PsiGeneration out;
  for (std::size_t c = 0; c < n; ++c) {
    out.bellman.push_back(steps[c].residuals.at("bellman").residual);
    out.action.push_back(steps[c].residuals.at("action").residual);
    if (steps[c].residuals.pass()) {
      out.accepted.push_back(c);
      out.steps.push_back(steps[c]);
    }
  }
  out.tried = std::move(steps);
  return out;
}

PsiStep compose_steps(const ModelSpec& model, const PsiStep& first, const PsiStep& second,
                      double tol) {
  if (std::fabs(first.r - second.s) > kTimeTol) {
    throw PreconditionViolation("compose_steps: steps do not share a time");
  }
  if (w1_distance(first.mu, second.m) > tol) {
    throw PreconditionViolation("compose_steps: measures differ at the joint");
  }
  if (sup_distance(first.psi, second.phi) > tol) {
    throw PreconditionViolation("compose_steps: payoffs differ at the joint");
  }
  PsiStep out;
  if (second.r - second.s <= kTimeTol) {
    out = first;
  } else if (first.r - first.s <= kTimeTol) {
    out = second;
  } else {
    const PathMeasure tail = reanchor_flow(second.chi, first.nu_flow.extended(first.nu_flow.size() - 1));
    out.chi = concat_flows(model, first.chi, tail).chi;
    out.nu_flow = Flow::from_paths(out.chi);
  }
  out.s = first.s;
  out.r = second.r;
  out.m = first.m;
  out.phi = first.phi;
  out.mu = second.mu;
  out.psi = second.psi;
  out.residuals = Report{};
  return out;
}

Report psi_compose_check(const ModelSpec& model, const PsiStep& first, const PsiStep& second,
                         double tol) {
  return psi_check(model, compose_steps(model, first, second, tol), tol);
}

std::pair<PsiStep, PsiStep> split_step(const ModelSpec& model, const PsiStep& st, double t) {
  if (!well_formed(st)) throw InvalidArgument("split_step: malformed step");
  const auto& times = st.nu_flow.times();
  const std::size_t k = nearest_time_index(times, t);
  const double mid = times[k];
  const BellmanResult B = backward(model, st);
  const DiscreteMeasure at_mid = st.nu_flow.projected(k);
  PsiStep a, b;
  a.s = st.s;
  a.r = b.s = mid;
  b.r = st.r;
  a.m = st.m;
  a.mu = b.m = at_mid;
  b.mu = st.mu;
  a.phi = st.phi;
  a.psi = b.phi = B.values[k];
  b.psi = st.psi;
  a.nu_flow = st.nu_flow.restrict(st.s, mid);
  b.nu_flow = st.nu_flow.restrict(mid, st.r);
  a.chi = restrict_paths(st.chi, st.s, mid);
  b.chi = restrict_paths(st.chi, mid, st.r);
  return {std::move(a), std::move(b)};
}

}  // namespace mfgv
