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

#include "mfgv/viability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfgv/bellman.hpp"
#include "mfgv/dynamics.hpp"
#include "mfgv/error.hpp"
#include "mfgv/fit.hpp"
#include "mfgv/parallel.hpp"
#include "mfgv/wasserstein.hpp"

namespace mfgv {
namespace {

constexpr double kTimeTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest violation of a report: excess over upper bounds, shortfall below
// lower bounds; NaN counts as infinite.
double violation(const Report& rep) {
  double v = 0.0;
  for (const auto& c : rep.checks) {
    if (std::isnan(c.residual)) return kInf;
    v = std::max(v, c.lower ? c.bound - c.residual : c.residual - c.bound);
  }
  return std::max(v, 0.0);
}

std::vector<GridFunction> values_at(const ValueMultifunction& V, double r) {
  std::vector<GridFunction> out;
  for (std::size_t i : V.at_time(r)) {
    const auto& vals = V.samples()[i].values;
    out.insert(out.end(), vals.begin(), vals.end());
  }
  return out;
}

// Replaces every running-reward velocity b of gamma by the value that
// minimizes the largest distance to F along its own straight chord; the
// positions, and hence the chord's population, do not depend on b.
VelocityPlan fit_rewards(const ModelSpec& model, const VelocityPlan& gamma, double s, double r,
                         int steps) {
  const PathMeasure chords = linear_lift(gamma, s, r, steps);
  const Flow flow = Flow::from_paths(chords);
  const std::vector<Stats> stats = summarize_flow(model, flow);
  const std::size_t K = chords.times.size() - 1;
  VelocityPlan out = gamma;
  parallel_for(out.atoms.size(), [&](std::size_t i) {
    const Trajectory& tr = chords.atoms[i].point;
    Velocity v = out.atoms[i].right;
    auto defect = [&](double b) {
      v.b = b;
      double worst = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        worst = std::max(worst, dist_to_vectogram(model, v, chords.times[k], tr[k].x, stats[k]));
      }
      return worst;
    };
    // The defect is convex in b: golden-section search around the current b.
    const double span = 2.0 * (model.R + 1.0);
    double lo = gamma.atoms[i].right.b - span, hi = gamma.atoms[i].right.b + span;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = defect(x1), f2 = defect(x2);
    for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = defect(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = defect(x2);
      }
    }
    const double b0 = gamma.atoms[i].right.b, bm = 0.5 * (lo + hi);
    out.atoms[i].right.b = defect(bm) < defect(b0) ? bm : b0;
  });
  return out;
}

}  // namespace

// -- value multifunctions ---------------------------------------------------

ValueMultifunction ValueMultifunction::from_solution(const MFGSolution& sol) {
  ValueMultifunction V;
  V.add_solution(sol);
  double M = 0.0, C = 0.0;
  for (const auto& phi : sol.V) {
    M = std::max(M, phi.sup_norm());
    C = std::max(C, phi.lipschitz());
  }
  V.set_bounds(M, C);
  return V;
}

void ValueMultifunction::add(double t, const DiscreteMeasure& m, const GridFunction& phi) {
  mfgv::validate(m);
  if (phi.size() == 0) throw InvalidArgument("ValueMultifunction::add: empty payoff");
  for (auto& s : samples_) {
    if (std::fabs(s.t - t) <= kTimeTol && w1_distance(s.m, m) <= 1e-12) {
      s.values.push_back(phi);
      return;
    }
  }
  samples_.push_back({t, m, {phi}});
}

void ValueMultifunction::add_solution(const MFGSolution& sol) {
  if (sol.times.size() != sol.V.size() || sol.times.size() != sol.m_flow.size()) {
    throw InvalidArgument("ValueMultifunction::add_solution: inconsistent solution");
  }
  for (std::size_t k = 0; k < sol.times.size(); ++k) add(sol.times[k], sol.m_flow[k], sol.V[k]);
  sources_.push_back(std::make_shared<const MFGSolution>(sol));
}

std::vector<PsiStep> ValueMultifunction::stored_steps(double s, double r, const DiscreteMeasure& m,
                                                      const GridFunction& phi, double tol) const {
  std::vector<PsiStep> out;
  for (const auto& src : sources_) {
    const auto& times = src->times;
    if (s < times.front() - kTimeTol || r > times.back() + kTimeTol) continue;
    const std::size_t i = nearest_time_index(times, s), j = nearest_time_index(times, r);
    if (std::fabs(times[i] - s) > kTimeTol || std::fabs(times[j] - r) > kTimeTol) continue;
    const GridFunction& v = src->V[i];
    if (v.n() != phi.n() || v.dim() != phi.dim() || sup_distance(v, phi) > tol) continue;
    if (w1_distance(src->m_flow[i], m) > tol) continue;
    PsiStep st = r - s <= kTimeTol ? trivial_step(s, m, phi) : restrict_solution(*src, s, r);
    st.m = m;
    st.phi = phi;
    if (r - s <= kTimeTol) st.psi = src->V[j];
    out.push_back(std::move(st));
  }
  return out;
}

double ValueMultifunction::nearest_time(double t) const {
  if (samples_.empty()) throw OutOfRange("ValueMultifunction: no samples");
  double best = samples_.front().t;
  for (const auto& s : samples_) {
    const double d = std::fabs(s.t - t), db = std::fabs(best - t);
    if (d < db - kTimeTol || (std::fabs(d - db) <= kTimeTol && s.t < best)) best = s.t;
  }
  return best;
}

double ValueMultifunction::last_time() const {
  if (samples_.empty()) throw OutOfRange("ValueMultifunction: no samples");
  double t = samples_.front().t;
  for (const auto& s : samples_) t = std::max(t, s.t);
  return t;
}

std::vector<std::size_t> ValueMultifunction::at_time(double t) const {
  const double tn = nearest_time(t);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (std::fabs(samples_[i].t - tn) <= kTimeTol) out.push_back(i);
  }
  return out;
}

ValueMultifunction::Member ValueMultifunction::nearest(double t, const DiscreteMeasure& m) const {
  Member best{0, kInf, 0.0};
  for (std::size_t i : at_time(t)) {
    const double d = w1_distance(samples_[i].m, m);
    if (d < best.w1) best = {i, d, std::fabs(samples_[i].t - t)};
  }
  return best;
}

double ValueMultifunction::membership(double r, const DiscreteMeasure& mu, const GridFunction& psi,
                                      double radius) const {
  double best = kInf;
  for (std::size_t i : at_time(r)) {
    if (w1_distance(samples_[i].m, mu) > radius) continue;
    for (const auto& phi : samples_[i].values) {
      if (phi.lattice().dim() != psi.dim() || phi.n() != psi.n()) continue;
      best = std::min(best, sup_distance(phi, psi));
    }
  }
  return best;
}

Report ValueMultifunction::validate(double slack) const {
  std::size_t empty = 0;
  double M = 0.0, C = 0.0;
  for (const auto& s : samples_) {
    if (s.values.empty()) ++empty;
    for (const auto& phi : s.values) {
      M = std::max(M, phi.sup_norm());
      C = std::max(C, phi.lipschitz());
    }
  }
  Report rep;
  rep.add(check_le("nonempty", static_cast<double>(empty), 0.0));
  rep.add(check_le("bound", M, M_ + slack));
  rep.add(check_le("lipschitz", C, C_ + slack));
  return rep;
}

// -- velocity plans -----------------------------------------------------------

ExtendedMeasure shift_theta(const VelocityPlan& beta, double tau) {
  ExtendedMeasure out;
  for (const auto& a : beta.atoms) {
    out.atoms.push_back({{translate(a.left.x, a.right.a, tau), tau * a.right.b}, a.weight});
  }
  return out;
}

ExtendedMeasure shift_xi(const VelocityPlan& gamma, double tau) {
  ExtendedMeasure out;
  for (const auto& a : gamma.atoms) {
    out.atoms.push_back(
        {{translate(a.left.x, a.right.a, tau), a.left.z + tau * a.right.b}, a.weight});
  }
  return out;
}

PathMeasure linear_lift(const VelocityPlan& gamma, double tau, double theta, int steps) {
  if (!(theta > tau)) throw InvalidArgument("linear_lift: need tau < theta");
  PathMeasure chi;
  chi.times = uniform_times(tau, theta, steps);
  for (const auto& a : gamma.atoms) {
    Trajectory tr;
    tr.reserve(chi.times.size());
    for (double t : chi.times) {
      const double d = t - tau;
      tr.push_back({translate(a.left.x, a.right.a, d), a.left.z + d * a.right.b});
    }
    chi.atoms.push_back({std::move(tr), a.weight});
  }
  return chi;
}

VelocityPlan finite_difference_plan(const PathMeasure& chi, double s, double r) {
  if (chi.times.empty()) throw InvalidArgument("finite_difference_plan: empty paths");
  const std::size_t i = nearest_time_index(chi.times, s), j = nearest_time_index(chi.times, r);
  if (!(j > i)) throw InvalidArgument("finite_difference_plan: need s < r on the grid");
  const double dt = chi.times[j] - chi.times[i];
  VelocityPlan beta;
  for (const auto& a : chi.atoms) {
    const Trajectory& tr = a.point;
    const int dim = tr[i].x.dim;
    Coords d{};
    for (std::size_t k = i; k < j; ++k) {
      const Coords step = displacement(tr[k].x, tr[k + 1].x);
      for (int c = 0; c < dim; ++c) d[static_cast<std::size_t>(c)] += step[static_cast<std::size_t>(c)];
    }
    Velocity v;
    for (int c = 0; c < dim; ++c) v.a[static_cast<std::size_t>(c)] = d[static_cast<std::size_t>(c)] / dt;
    v.b = (tr[j].z - tr[i].z) / dt;
    beta.atoms.push_back({tr[i], v, a.weight});
  }
  return beta;
}

VelocityPlan zero_plan(const DiscreteMeasure& m) {
  VelocityPlan beta;
  for (const auto& a : m.atoms) beta.atoms.push_back({{a.point, 0.0}, Velocity{}, a.weight});
  return beta;
}

double plan_infeasibility(const ModelSpec& model, const VelocityPlan& beta, double t,
                          const DiscreteMeasure& m) {
  const Stats stats = model.summarize(m);
  double total = 0.0;
  for (const auto& a : beta.atoms) {
    total += a.weight * dist_to_vectogram(model, a.right, t, a.left.x, stats);
  }
  return total;
}

double plan_radius(const VelocityPlan& beta) {
  double r = 0.0;
  for (const auto& a : beta.atoms) {
    r = std::max({r, norm(a.right.a, a.left.x.dim), std::fabs(a.right.b)});
  }
  return r;
}

// -- viability ----------------------------------------------------------------

Report viability_check(const ModelSpec& model, const ValueMultifunction& V, double s, double r,
                       double tol, const MfgOptions& options,
                       const std::vector<std::size_t>& which) {
  if (!(r >= s)) throw InvalidArgument("viability_check: need s <= r");
  const std::vector<GridFunction> candidates = values_at(V, r);
  if (candidates.empty()) throw PreconditionViolation("viability_check: no values near r");
  std::vector<std::size_t> samples = which.empty() ? V.at_time(s) : which;
  Report rep;
  for (std::size_t i : samples) {
    const ValueSample& smp = V.samples().at(i);
    for (std::size_t j = 0; j < smp.values.size(); ++j) {
      const PsiGeneration gen =
          psi_generate(model, smp.t, r, smp.m, smp.values[j], candidates, tol, options);
      std::vector<PsiStep> tried = gen.tried;
      for (auto& st : V.stored_steps(smp.t, r, smp.m, smp.values[j], tol)) {
        st.residuals = psi_check(model, st, tol);
        tried.push_back(std::move(st));
      }
      double best = kInf;
      for (const auto& st : tried) {
        const double score =
            std::max(violation(st.residuals), V.membership(r, st.mu, st.psi, tol));
        best = std::min(best, score);
      }
      rep.add(check_le("sample" + std::to_string(i) + ".value" + std::to_string(j), best, tol));
    }
  }
  return rep;
}

// -- set-valued derivative ------------------------------------------------------

namespace {

// One admissible choice for an atom: velocities carrying fractions of its mass.
struct Choice {
  std::vector<std::pair<Velocity, double>> parts;
};

VelocityPlan plan_of(const DiscreteMeasure& m, const std::vector<std::vector<Choice>>& options,
                     const std::vector<std::size_t>& pick) {
  VelocityPlan beta;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (const auto& [v, frac] : options[i][pick[i]].parts) {
      beta.atoms.push_back({{m.atoms[i].point, 0.0}, v, m.atoms[i].weight * frac});
    }
  }
  return beta;
}

bool within(const Velocity& v, int dim, double c) {
  return norm(v.a, dim) <= c + 1e-12 && std::fabs(v.b) <= c + 1e-12;
}

}  // namespace

DerivativeWitness derivative_test(const ModelSpec& model, const ValueMultifunction& V, double t,
                                  const DiscreteMeasure& m, const GridFunction& phi,
                                  const DerivativeOptions& options) {
  validate(m);
  if (options.tau_seq.empty()) throw InvalidArgument("derivative_test: empty tau sequence");
  for (double tau : options.tau_seq) {
    if (!(tau > 0.0)) throw InvalidArgument("derivative_test: tau must be positive");
  }
  const double c = options.c > 0.0 ? options.c : model.R;
  const Stats stats = model.summarize(m);
  const int dim = measure_dim(m);

  // Candidate choices per atom: mesh velocities and node-landing hull points
  // within radius c, then the seed's conditional distribution at that atom.
  const double tau_min = *std::min_element(options.tau_seq.begin(), options.tau_seq.end());
  const auto mesh = mixture_mesh(model.num_controls(), model.mesh);
  std::vector<std::vector<Choice>> choices(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const TorusPoint& x = m.atoms[i].point;
    for (const auto& cand :
         step_candidates(control_extremes(model, t, x, stats), mesh, x, tau_min, phi.n())) {
      if (within(cand.v, dim, c)) choices[i].push_back({{{cand.v, 1.0}}});
    }
    if (options.seed != nullptr) {
      Choice sc;
      double mass = 0.0;
      for (const auto& a : options.seed->atoms) {
        if (torus_dist(a.left.x, m.atoms[i].point) <= kMatchTol && within(a.right, dim, c)) {
          sc.parts.push_back({a.right, a.weight});
          mass += a.weight;
        }
      }
      if (mass > 0.0) {
        for (auto& p : sc.parts) p.second /= mass;
        choices[i].push_back(std::move(sc));
      }
    }
    if (choices[i].empty()) choices[i].push_back({{{Velocity{}, 1.0}}});
  }

  const std::size_t n = options.tau_seq.size();
  const std::vector<double> wts = intercept_weights(options.tau_seq);
  const double base = action(phi, lift(m));

  // Start from the seed when given, otherwise from the best velocity for the
  // first lookup of phi itself.
  std::vector<std::size_t> pick(m.size(), 0);
  if (options.seed != nullptr) {
    for (std::size_t i = 0; i < m.size(); ++i) pick[i] = choices[i].size() - 1;
  }

  std::vector<GridFunction> lookups(n);
  std::vector<DerivativeRecord> records(n);
  auto refresh = [&](const VelocityPlan& beta) {
    parallel_for(n, [&](std::size_t k) {
      const double tau = options.tau_seq[k];
      const DiscreteMeasure mk = project(shift_theta(beta, tau));
      const auto mem = V.nearest(t + tau, mk);
      const ValueSample& smp = V.samples()[mem.sample];
      const GridFunction A0 = frozen_A(model, t, t + tau, stats, smp.values.front());
      double best_q = kInf;
      std::size_t best = 0;
      for (std::size_t j = 0; j < smp.values.size(); ++j) {
        const double q =
            sup_distance(j == 0 ? A0 : frozen_A(model, t, t + tau, stats, smp.values[j]), phi) / tau;
        if (q < best_q) {
          best_q = q;
          best = j;
        }
      }
      lookups[k] = smp.values[best];
      records[k] = {tau, best_q, 0.0, mem.w1, mem.dt};
    });
  };

  VelocityPlan beta = plan_of(m, choices, pick);
  for (int sweep = 0; sweep < std::max(1, options.max_sweeps); ++sweep) {
    refresh(beta);
    std::vector<std::size_t> next(m.size());
    parallel_for(m.size(), [&](std::size_t i) {
      const TorusPoint& x = m.atoms[i].point;
      double best = -kInf;
      std::size_t arg = pick[i];
      for (std::size_t ch = 0; ch < choices[i].size(); ++ch) {
        double score = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double tau = options.tau_seq[k];
          double val = 0.0;
          for (const auto& [v, frac] : choices[i][ch].parts) {
            val += frac * (lookups[k](translate(x, v.a, tau)) + tau * v.b);
          }
          score += wts[k] * (val - phi(x)) / tau;
        }
        if (score > best + 1e-14) {
          best = score;
          arg = ch;
        }
      }
      next[i] = arg;
    });
    const bool stable = next == pick;
    pick = next;
    beta = plan_of(m, choices, pick);
    if (stable) break;
  }
  refresh(beta);

  DerivativeWitness out;
  std::vector<double> qs(n), ps(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double tau = options.tau_seq[k];
    records[k].p = (action(lookups[k], shift_theta(beta, tau)) - base) / tau;
    qs[k] = records[k].q;
    ps[k] = records[k].p;
  }
  out.q_limit = linear_fit(options.tau_seq, qs).intercept;
  out.p_limit = linear_fit(options.tau_seq, ps).intercept;
  out.records = std::move(records);
  out.infeasibility = plan_infeasibility(model, beta, t, m);
  out.radius = plan_radius(beta);
  out.beta = std::move(beta);
  out.found = out.q_limit <= options.tol && out.p_limit >= -options.tol;
  return out;
}

// -- Euler chains ---------------------------------------------------------------

ChainResult chain_solve(const ModelSpec& model, const ValueMultifunction& V, double t_star,
                        const DiscreteMeasure& m_star, const GridFunction& phi_star, int N,
                        const ChainOptions& options) {
  validate(m_star);
  if (N < 1) throw InvalidArgument("chain_solve: need N >= 1");
  const double T = V.last_time();
  if (!(T > t_star)) throw InvalidArgument("chain_solve: need t* < T");
  for (std::size_t i : V.at_time(T)) {
    const ValueSample& smp = V.samples()[i];
    for (const auto& val : smp.values) {
      if (sup_distance(val, terminal_payoff(model, val.lattice(), smp.m)) > options.tol) {
        throw PreconditionViolation("chain_solve: V(T, m) differs from sigma(., m)");
      }
    }
  }
  const int fine = std::max(1, options.mfg.steps / N);
  const int per_chord = std::max(1, options.lift_steps);
  MfgOptions sub = options.mfg;
  sub.steps = fine;

  ChainResult out;
  PathMeasure chain;
  DiscreteMeasure m = m_star;
  ExtendedMeasure eta = lift(m_star);
  GridFunction phi = phi_star;
  for (int i = 0; i < N; ++i) {
    const double s = t_star + (T - t_star) * i / N;
    const double r = i + 1 == N ? T : t_star + (T - t_star) * (i + 1) / N;
    const std::vector<GridFunction> cands = values_at(V, r);
    std::vector<PsiStep> tried =
        psi_generate(model, s, r, m, phi, cands, options.tol, sub).tried;
    for (auto& st : V.stored_steps(s, r, m, phi, options.tol)) {
      st.residuals = psi_check(model, st, options.tol);
      tried.push_back(std::move(st));
    }
    double best = kInf, best_mem = kInf;
    std::size_t arg = tried.size();
    for (std::size_t c = 0; c < tried.size(); ++c) {
      const PsiStep& st = tried[c];
      const double mem = V.membership(r, st.mu, st.psi, options.tol);
      const double score = std::max(violation(st.residuals), mem);
      if (score < best) {
        best = score;
        best_mem = mem;
        arg = c;
      }
    }
    if (arg == tried.size() || !(best <= options.tol)) {
      throw ChainFailure("chain_solve: no admissible step", i, best);
    }
    const PsiStep& st = tried[arg];
    const PathMeasure anchored = reanchor_flow(st.chi, eta);
    const VelocityPlan gamma =
        fit_rewards(model, finite_difference_plan(anchored, s, r), s, r, per_chord);
    const PathMeasure lifted = linear_lift(gamma, s, r, per_chord);
    chain = i == 0 ? lifted : concat_path_measures(chain, lifted);
    const ExtendedMeasure chain_end = shift_xi(gamma, r - s);
    ChainStep rec;
    rec.s = s;
    rec.r = r;
    rec.candidate = arg;
    rec.bellman = st.residuals.at("bellman").residual;
    rec.membership = best_mem;
    rec.drift = w1(chain_end, evaluate_index(anchored, anchored.times.size() - 1)).distance;
    out.steps.push_back(rec);
    eta = chain_end;
    m = merge_duplicates(project(eta));
    phi = st.psi;
  }

  MFGSolution& sol = out.solution;
  sol.chi = merge_identical_paths(chain);
  sol.times = sol.chi.times;
  sol.nu_flow = Flow::from_paths(sol.chi);
  for (std::size_t k = 0; k < sol.times.size(); ++k) sol.m_flow.push_back(sol.nu_flow.projected(k));
  sol.m0 = m_star;
  const GridFunction sigma = terminal_payoff(model, phi_star.lattice(), sol.m_flow.back());
  sol.V = bellman_B(model, sol.times, summarize_flow(model, sol.nu_flow), sigma).values;
  sol.residuals.iterations = N;
  sol.residuals.converged = true;
  sol.residuals.gap = equilibrium_gap(sol, sigma);
  out.verify = verify_solution(model, sol, options.verify_tol);
  out.backward = sup_distance(sol.V.front(), phi_star);
  out.verify.add(check_le("initial_value", out.backward, options.verify_tol));
  out.verify.add(
      check_le("initial_measure", w1_distance(sol.m_flow.front(), m_star), options.verify_tol));
  out.action_gap = action(phi, eta) - action(phi_star, lift(m_star));
  return out;
}

}  // namespace mfgv
