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

#include "mfgv/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "mfgv/error.hpp"
#include "mfgv/parallel.hpp"
#include "mfgv/wasserstein.hpp"

namespace mfgv {
namespace {

struct Played {
  Flow flow;
  PathMeasure chi;
  std::vector<Stats> stats;
  GridFunction psi;
  BellmanResult sweep;  // empty unless requested
};

struct Response {
  RelaxedControl control;
  double value = 0.0;  // V(t0, x_i)
};

bool same_control(const RelaxedControl& a, const RelaxedControl& b) {
  if (a.weights.size() != b.weights.size()) return false;
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    for (std::size_t j = 0; j < a.weights[k].size(); ++j) {
      if (std::fabs(a.weights[k][j] - b.weights[k][j]) > 1e-12) return false;
    }
  }
  return true;
}

std::size_t find_or_add(std::vector<Strategy>& profile, std::size_t atom,
                        const RelaxedControl& c) {
  for (std::size_t p = 0; p < profile.size(); ++p) {
    if (profile[p].atom == atom && same_control(profile[p].control, c)) return p;
  }
  profile.push_back({atom, c, 0.0});
  return profile.size() - 1;
}

void drop_empty(std::vector<Strategy>& profile) {
  profile.erase(std::remove_if(profile.begin(), profile.end(),
                               [](const Strategy& s) { return s.weight <= 0.0; }),
                profile.end());
}

Flow average_flows(const Flow& a, const Flow& b, double w) {
  std::vector<DiscreteMeasure> slices(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    DiscreteMeasure m;
    for (const auto& at : a.projected(k).atoms) m.atoms.push_back({at.point, (1.0 - w) * at.weight});
    for (const auto& at : b.projected(k).atoms) m.atoms.push_back({at.point, w * at.weight});
    slices[k] = merge_duplicates(m);
  }
  return Flow::from_projected(a.times(), slices);
}

class Solver {
 public:
  Solver(const ModelSpec& model, double t0, double T, const DiscreteMeasure& m0,
         const MfgOptions& opt)
      : model_(model), m0_(m0), opt_(opt), lattice_(model.dim, opt.lattice_n),
        times_(uniform_times(t0, T, opt.steps)) {}

  const std::vector<double>& times() const { return times_; }

  Played play(const std::vector<Strategy>& profile, const Flow* seed, bool sweep = true) const {
    ExtendedMeasure nu0;
    for (const auto& s : profile) nu0.atoms.push_back({{m0_.atoms[s.atom].point, 0.0}, s.weight});
    MfdiOptions o = opt_.mfdi;
    o.steps = opt_.steps;
    o.seed = seed;
    const auto policy = [&profile](std::size_t i, std::size_t k, double, const TorusPoint&,
                                   const Stats&) { return profile[i].control.weights[k]; };
    MfdiResult r = mfdi_solve(model_, times_.front(), times_.back(), nu0, policy, o);
    return against(std::move(r.flow), std::move(r.chi), sweep);
  }

  Played against(Flow flow, PathMeasure chi, bool with_sweep = true) const {
    std::vector<Stats> stats = summarize_flow(model_, flow);
    GridFunction psi = opt_.terminal != nullptr
                           ? *opt_.terminal
                           : terminal_payoff(model_, lattice_, flow.projected(flow.size() - 1));
    BellmanResult sweep;
    if (with_sweep) sweep = bellman_B(model_, times_, stats, psi);
    return {std::move(flow), std::move(chi), std::move(stats), std::move(psi), std::move(sweep)};
  }

  std::vector<Response> best_responses(const Played& p) const {
    std::vector<Response> out(m0_.size());
    parallel_for(m0_.size(), [&](std::size_t i) {
      const Selection s = optimal_selection(model_, p.sweep, p.stats, m0_.atoms[i].point);
      out[i] = {s.control, p.sweep.values.front()(m0_.atoms[i].point)};
    });
    return out;
  }

  static double payoff(const Played& p, std::size_t path) {
    const Trajectory& tr = p.chi.atoms[path].point;
    return p.psi(tr.back().x) + tr.back().z - tr.front().z;
  }

  std::vector<Strategy> pure_profile(const std::vector<Response>& br) const {
    std::vector<Strategy> out;
    for (std::size_t i = 0; i < m0_.size(); ++i) out.push_back({i, br[i].control, m0_.atoms[i].weight});
    return out;
  }

  static std::vector<double> regrets(const Played& p, const std::vector<Strategy>& profile,
                                     const std::vector<Response>& br) {
    std::vector<double> out(profile.size(), 0.0);
    for (std::size_t q = 0; q < profile.size(); ++q) {
      if (profile[q].weight > 0.0) out[q] = br[profile[q].atom].value - payoff(p, q);
    }
    return out;
  }

  // Equilibrium restricted to the strategies already in `profile`: every
  // played strategy of an atom ends within tol of that atom's best one.
  // Each round linearizes payoffs in the weights by finite differences,
  // solves the linear model and re-evaluates. Returns the number of rounds.
  int equalize(std::vector<Strategy>& profile, Played& cur, double tol, int max_rounds) const {
    const bool fixed_paths = !model_.f_depends_on_m;
    Eigen::VectorXd P = payoffs_of(cur, profile.size());
    int rounds = 0;
    for (; rounds < max_rounds; ++rounds) {
      const std::size_t n = profile.size();
      if (restricted_gap(profile, P) < tol) break;
      // Base strategy per atom: the heaviest one; its column stays zero.
      std::vector<std::size_t> base(m0_.size(), n);
      for (std::size_t q = 0; q < n; ++q) {
        std::size_t& b = base[profile[q].atom];
        if (b == n || profile[q].weight > profile[b].weight) b = q;
      }
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t q = 0; q < n; ++q) {
        const std::size_t b = base[profile[q].atom];
        if (q == b) continue;
        const double eps = 1e-4 * profile[b].weight;
        std::vector<Strategy> pr = profile;
        pr[q].weight += eps;
        pr[b].weight -= eps;
        G.col(static_cast<Eigen::Index>(q)) = (reevaluate(pr, cur) - P) / eps;
      }
      std::vector<double> w(n);
      for (std::size_t q = 0; q < n; ++q) w[q] = profile[q].weight;
      solve_linear_model(profile, P, G, w, 0.01 * tol);
      for (std::size_t q = 0; q < n; ++q) profile[q].weight = w[q];
      renormalize(profile);
      if (fixed_paths) {
        P = reevaluate(profile, cur);
      } else {
        cur = play(profile, &cur.flow, false);
        P = payoffs_of(cur, n);
      }
    }
    if (fixed_paths && rounds > 0) {
      cur = play(profile, &cur.flow);
    } else if (cur.sweep.values.empty()) {
      cur = against(cur.flow, cur.chi);
    }
    return rounds;
  }

  static Eigen::VectorXd payoffs_of(const Played& p, std::size_t n) {
    Eigen::VectorXd P(static_cast<Eigen::Index>(n));
    for (std::size_t q = 0; q < n; ++q) P(static_cast<Eigen::Index>(q)) = payoff(p, q);
    return P;
  }

  // Payoffs after a change of weights. When motion ignores the population
  // the paths of `ref` keep their positions and only rewards and the
  // terminal payoff change, so no fixed-point solve is needed.
  Eigen::VectorXd reevaluate(const std::vector<Strategy>& profile, const Played& ref) const {
    const std::size_t n = profile.size();
    if (model_.f_depends_on_m) return payoffs_of(play(profile, &ref.flow, false), n);
    const std::size_t K = times_.size();
    std::vector<Stats> stats(K);
    DiscreteMeasure last;
    for (std::size_t k = 0; k < K; ++k) {
      DiscreteMeasure m;
      for (std::size_t q = 0; q < n; ++q) {
        if (profile[q].weight > 0.0) m.atoms.push_back({ref.chi.atoms[q].point[k].x, profile[q].weight});
      }
      m = merge_duplicates(m);
      stats[k] = model_.summarize(m);
      if (k + 1 == K) last = std::move(m);
    }
    const GridFunction psi =
        opt_.terminal != nullptr ? *opt_.terminal : terminal_payoff(model_, lattice_, last);
    Eigen::VectorXd P(static_cast<Eigen::Index>(n));
    for (std::size_t q = 0; q < n; ++q) {
      const Trajectory& tr = ref.chi.atoms[q].point;
      double z = tr.front().z;
      for (std::size_t k = 0; k + 1 < K; ++k) {
        const auto ext = control_extremes(model_, times_[k], tr[k].x, stats[k]);
        z += (times_[k + 1] - times_[k]) * mix(ext, profile[q].control.weights[k]).b;
      }
      P(static_cast<Eigen::Index>(q)) = psi(tr.back().x) + z - tr.front().z;
    }
    return P;
  }

  // max over atoms of (best payoff) - (worst played payoff).
  double restricted_gap(const std::vector<Strategy>& profile, const Eigen::VectorXd& P) const {
    std::vector<double> hi(m0_.size(), -std::numeric_limits<double>::infinity());
    std::vector<double> lo(m0_.size(), std::numeric_limits<double>::infinity());
    for (std::size_t q = 0; q < profile.size(); ++q) {
      const std::size_t i = profile[q].atom;
      hi[i] = std::max(hi[i], P(static_cast<Eigen::Index>(q)));
      if (profile[q].weight > 0.0) lo[i] = std::min(lo[i], P(static_cast<Eigen::Index>(q)));
    }
    double g = 0.0;
    for (std::size_t i = 0; i < m0_.size(); ++i) {
      if (lo[i] < std::numeric_limits<double>::infinity()) g = std::max(g, hi[i] - lo[i]);
    }
    return g;
  }

  // Equilibrium of the linear payoff model P0 + G (w - w0) over the atom
  // simplices; `w` holds w0 on entry. A primal active-set iteration runs
  // first; if it stalls, pairwise exchanges at tightening tolerances locate
  // the active set for an exact solve.
  void solve_linear_model(const std::vector<Strategy>& profile, const Eigen::VectorXd& P0,
                          const Eigen::MatrixXd& G, std::vector<double>& w, double tol) const {
    const std::vector<double> w0 = w;
    if (active_set(profile, P0, G, w0, w, tol)) return;
    w = w0;
    Eigen::VectorXd P = P0;
    for (double loose = 1e-3; ; loose *= 0.01) {
      const double target = std::max(loose, tol);
      pairwise(profile, G, w, P, target);
      if (polish(profile, P0, G, w0, w, tol) || target == tol) return;
    }
  }

  // Equality solve on the active set; returns weights (zero off the set)
  // and per-atom payoff levels, or nothing if the system is degenerate.
  bool solve_active(const std::vector<Strategy>& profile, const Eigen::VectorXd& base,
                    const Eigen::MatrixXd& G, const std::vector<bool>& active,
                    std::vector<double>& wp, Eigen::VectorXd& mu) const {
    const std::size_t n = profile.size(), m = m0_.size();
    const auto idx = [](std::size_t q) { return static_cast<Eigen::Index>(q); };
    std::vector<std::size_t> act;
    for (std::size_t q = 0; q < n; ++q) {
      if (active[q]) act.push_back(q);
    }
    const std::size_t a = act.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(idx(a + m), idx(a + m));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(idx(a + m));
    std::vector<bool> has(m, false);
    for (std::size_t k = 0; k < a; ++k) {
      const std::size_t q = act[k];
      for (std::size_t l = 0; l < a; ++l) A(idx(k), idx(l)) = G(idx(q), idx(act[l]));
      A(idx(k), idx(a + profile[q].atom)) = -1.0;
      rhs(idx(k)) = -base(idx(q));
      A(idx(a + profile[q].atom), idx(k)) = 1.0;
      has[profile[q].atom] = true;
    }
    for (std::size_t i = 0; i < m; ++i) {
      rhs(idx(a + i)) = m0_.atoms[i].weight;
      if (!has[i]) A(idx(a + i), idx(a + i)) = 1.0;  // keeps the system square
    }
    const auto qr = A.colPivHouseholderQr();
    if (qr.rank() < A.rows()) return false;
    const Eigen::VectorXd sol = qr.solve(rhs);
    if (!sol.allFinite()) return false;
    wp.assign(n, 0.0);
    for (std::size_t k = 0; k < a; ++k) wp[act[k]] = sol(idx(k));
    mu = sol.tail(idx(m));
    return true;
  }

  bool active_set(const std::vector<Strategy>& profile, const Eigen::VectorXd& P0,
                  const Eigen::MatrixXd& G, const std::vector<double>& w0, std::vector<double>& w,
                  double tol) const {
    const std::size_t n = w.size();
    const auto idx = [](std::size_t q) { return static_cast<Eigen::Index>(q); };
    Eigen::VectorXd base = P0;
    for (std::size_t j = 0; j < n; ++j) base -= w0[j] * G.col(idx(j));
    std::vector<bool> active(n);
    for (std::size_t q = 0; q < n; ++q) active[q] = w[q] > 0.0;
    std::vector<double> wp;
    Eigen::VectorXd mu;
    for (std::size_t it = 0; it < 4 * n + 10; ++it) {
      if (!solve_active(profile, base, G, active, wp, mu)) return false;
      // Ratio step toward the equality solution, dropping the first
      // strategy whose weight reaches zero.
      double t = 1.0;
      std::size_t blocking = n;
      for (std::size_t q = 0; q < n; ++q) {
        if (active[q] && wp[q] < 0.0) {
          const double tq = w[q] / (w[q] - wp[q]);
          if (tq < t) {
            t = tq;
            blocking = q;
          }
        }
      }
      if (blocking != n) {
        for (std::size_t q = 0; q < n; ++q) {
          if (active[q]) w[q] += t * (wp[q] - w[q]);
        }
        w[blocking] = 0.0;
        active[blocking] = false;
        for (std::size_t q = 0; q < n; ++q) {
          if (active[q] && w[q] <= 0.0) {
            w[q] = 0.0;
            active[q] = false;
          }
        }
        continue;
      }
      w = wp;
      Eigen::VectorXd P = base;
      for (std::size_t j = 0; j < n; ++j) P += w[j] * G.col(idx(j));
      std::size_t enter = n;
      double excess = tol;
      for (std::size_t q = 0; q < n; ++q) {
        const double e = P(idx(q)) - mu(idx(profile[q].atom));
        if (!active[q] && e > excess) {
          excess = e;
          enter = q;
        }
      }
      if (enter == n) return true;
      active[enter] = true;
    }
    return false;
  }

  void pairwise(const std::vector<Strategy>& profile, const Eigen::MatrixXd& G,
                std::vector<double>& w, Eigen::VectorXd& P, double tol) const {
    const std::size_t n = w.size();
    const auto idx = [](std::size_t q) { return static_cast<Eigen::Index>(q); };
    for (int step = 0; step < 100000; ++step) {
      std::vector<std::size_t> best(m0_.size(), n), worst(m0_.size(), n);
      for (std::size_t q = 0; q < n; ++q) {
        const std::size_t i = profile[q].atom;
        if (best[i] == n || P(idx(q)) > P(idx(best[i]))) best[i] = q;
        if (w[q] > 0.0 && (worst[i] == n || P(idx(q)) < P(idx(worst[i])))) worst[i] = q;
      }
      std::size_t atom = m0_.size();
      double g = tol;
      for (std::size_t i = 0; i < m0_.size(); ++i) {
        if (worst[i] == n) continue;
        const double gi = P(idx(best[i])) - P(idx(worst[i]));
        if (gi > g) {
          g = gi;
          atom = i;
        }
      }
      if (atom == m0_.size()) return;
      const std::size_t r = best[atom], q = worst[atom];
      const double curv =
          (G(idx(r), idx(r)) - G(idx(r), idx(q))) - (G(idx(q), idx(r)) - G(idx(q), idx(q)));
      const double delta = curv < 0.0 ? std::min(w[q], g / -curv) : w[q];
      w[q] -= delta;
      w[r] += delta;
      if (w[q] < 1e-16) w[q] = 0.0;
      P += delta * (G.col(idx(r)) - G.col(idx(q)));
    }
  }

  // Exact solve of the payoff equalities on the support of `w`; accepted
  // only if weights stay nonnegative and no unused strategy beats its atom.
  bool polish(const std::vector<Strategy>& profile, const Eigen::VectorXd& P0,
              const Eigen::MatrixXd& G, const std::vector<double>& w0, std::vector<double>& w,
              double tol) const {
    const std::size_t n = w.size();
    const auto idx = [](std::size_t q) { return static_cast<Eigen::Index>(q); };
    std::vector<std::size_t> act;
    for (std::size_t q = 0; q < n; ++q) {
      if (w[q] > 0.0) act.push_back(q);
    }
    const std::size_t a = act.size(), m = m0_.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(idx(a + m), idx(a + m));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(idx(a + m));
    Eigen::VectorXd base = P0;
    for (std::size_t j = 0; j < n; ++j) base -= w0[j] * G.col(idx(j));
    std::vector<bool> has(m, false);
    for (std::size_t k = 0; k < a; ++k) {
      const std::size_t q = act[k];
      for (std::size_t l = 0; l < a; ++l) A(idx(k), idx(l)) = G(idx(q), idx(act[l]));
      A(idx(k), idx(a + profile[q].atom)) = -1.0;
      rhs(idx(k)) = -base(idx(q));
      A(idx(a + profile[q].atom), idx(k)) = 1.0;
      has[profile[q].atom] = true;
    }
    for (std::size_t i = 0; i < m; ++i) {
      rhs(idx(a + i)) = m0_.atoms[i].weight;
      if (!has[i]) A(idx(a + i), idx(a + i)) = 1.0;  // keeps the system square
    }
    const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(rhs);
    if (!sol.allFinite()) return false;
    std::vector<double> wp(n, 0.0);
    for (std::size_t k = 0; k < a; ++k) {
      if (sol(idx(k)) < 0.0) return false;
      wp[act[k]] = sol(idx(k));
    }
    Eigen::VectorXd Pp = base;
    for (std::size_t j = 0; j < n; ++j) Pp += wp[j] * G.col(idx(j));
    for (std::size_t q = 0; q < n; ++q) {
      if (Pp(idx(q)) > sol(idx(a + profile[q].atom)) + tol) return false;
    }
    for (std::size_t k = 0; k < a; ++k) {
      if (std::fabs(Pp(idx(act[k])) - sol(idx(a + profile[act[k]].atom))) > tol) return false;
    }
    w = wp;
    return true;
  }

  // Restores each atom's total mass after rounding.
  void renormalize(std::vector<Strategy>& profile) const {
    std::vector<double> total(m0_.size(), 0.0);
    for (const auto& st : profile) total[st.atom] += st.weight;
    for (auto& st : profile) {
      if (total[st.atom] > 0.0) st.weight *= m0_.atoms[st.atom].weight / total[st.atom];
    }
  }

  Flow initial_belief() const {
    if (opt_.initial_guess == nullptr) return Flow::constant(times_, lift(m0_));
    std::vector<ExtendedMeasure> sl;
    for (double t : times_) sl.push_back(opt_.initial_guess->extended(opt_.initial_guess->index_at(t)));
    return Flow(times_, std::move(sl));
  }

 private:
  const ModelSpec& model_;
  const DiscreteMeasure& m0_;
  const MfgOptions& opt_;
  TorusLattice lattice_;
  std::vector<double> times_;
};

}  // namespace

GridFunction terminal_payoff(const ModelSpec& model, const TorusLattice& lattice,
                             const DiscreteMeasure& m) {
  const Stats s = model.summarize(m);
  return GridFunction::sample(lattice, [&](const TorusPoint& x) { return model.sigma(x, s); });
}

MFGSolution solve_mfg(const ModelSpec& model, double t0, double T, const DiscreteMeasure& m0,
                      const MfgOptions& opt) {
  validate(m0);
  if (measure_dim(m0) != model.dim) throw InvalidArgument("solve_mfg: dimension mismatch");
  if (!(T > t0)) throw InvalidArgument("solve_mfg: need t0 < T");
  if (opt.steps < 1 || opt.max_iter < 1 || !(opt.tol > 0.0) || opt.lattice_n < 2) {
    throw InvalidArgument("solve_mfg: bad options");
  }
  if (opt.terminal != nullptr && opt.terminal->dim() != model.dim) {
    throw InvalidArgument("solve_mfg: terminal payoff has wrong dimension");
  }
  Solver solver(model, t0, T, m0, opt);
  MfgResiduals res;

  // Main iteration on the belief flow.
  Flow belief = solver.initial_belief();
  std::vector<Strategy> profile;
  Played cur = solver.against(belief, PathMeasure{});
  for (int n = 1; n <= opt.max_iter; ++n) {
    profile = solver.pure_profile(solver.best_responses(cur));
    Played played = solver.play(profile, &belief);
    Flow next = (opt.method == SolveMethod::kPicard || n == 1)
                    ? played.flow
                    : average_flows(belief, played.flow, 1.0 / n);
    const double r = flow_distance(next, belief);
    res.history.push_back(r);
    res.flow = r;
    belief = std::move(next);
    if (r < opt.tol) {
      res.converged = true;
      res.iterations = std::max(1, n - 1);
      cur = std::move(played);
      break;
    }
    res.iterations = n;
    cur = opt.method == SolveMethod::kPicard ? std::move(played)
                                             : solver.against(belief, PathMeasure{});
  }
  // `cur` now holds the last pure best-response profile; for fictitious
  // play after non-convergence it still refers to the belief.
  if (!res.converged && opt.method == SolveMethod::kFictitiousPlay) {
    profile = solver.pure_profile(solver.best_responses(cur));
    cur = solver.play(profile, &belief);
  }

  if (opt.refine) {
    // Column generation: equalize payoffs inside the current strategy set,
    // then price every atom against a fresh Bellman sweep and add the best
    // responses that still beat the played strategies.
    const Flow before = cur.flow;
    bool settled = false;
    for (int pass = 0; pass < opt.max_refine; ++pass) {
      const auto br = solver.best_responses(cur);
      const auto regrets = Solver::regrets(cur, profile, br);
      res.max_regret = *std::max_element(regrets.begin(), regrets.end());
      if (res.max_regret < opt.refine_tol) {
        settled = true;
        break;
      }
      std::vector<double> atom_regret(m0.size(), 0.0);
      for (std::size_t q = 0; q < profile.size(); ++q) {
        atom_regret[profile[q].atom] = std::max(atom_regret[profile[q].atom], regrets[q]);
      }
      const std::size_t had = profile.size();
      for (std::size_t i = 0; i < m0.size(); ++i) {
        if (atom_regret[i] >= opt.refine_tol) find_or_add(profile, i, br[i].control);
      }
      if (profile.size() == had) {
        // Every best response is already played: the remaining regret is
        // the mismatch between lattice values and integrated paths.
        settled = true;
        break;
      }
      cur = solver.play(profile, &cur.flow);
      res.refinements += solver.equalize(profile, cur, 0.1 * opt.refine_tol, opt.max_moves);
      const std::size_t before_drop = profile.size();
      drop_empty(profile);
      if (profile.size() != before_drop) cur = solver.play(profile, &cur.flow);
    }
    res.refine_shift = flow_distance(before, cur.flow);
    res.converged = res.converged && settled;
  } else {
    const auto regrets = Solver::regrets(cur, profile, solver.best_responses(cur));
    res.max_regret = *std::max_element(regrets.begin(), regrets.end());
  }

  MFGSolution sol;
  sol.times = solver.times();
  sol.V = cur.sweep.values;
  for (std::size_t k = 0; k < cur.flow.size(); ++k) sol.m_flow.push_back(cur.flow.projected(k));
  sol.nu_flow = cur.flow;
  sol.chi = cur.chi;
  sol.m0 = m0;
  sol.profile = profile;
  if (opt.terminal != nullptr) sol.fixed_terminal = *opt.terminal;
  res.gap = equilibrium_gap(sol, cur.psi);
  sol.residuals = std::move(res);
  return sol;
}

double equilibrium_gap(const MFGSolution& sol, const GridFunction& psi) {
  const double end = action(psi, sol.nu_flow.extended(sol.nu_flow.size() - 1));
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    gap = std::min(gap, end - action(sol.V[k], sol.nu_flow.extended(k)));
  }
  return gap;
}

Report verify_solution(const ModelSpec& model, const MFGSolution& sol, double tol) {
  Report rep;
  const std::size_t K = sol.times.size();
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  if (K == 0 || sol.V.size() != K || sol.m_flow.size() != K || sol.nu_flow.size() != K ||
      sol.chi.times.size() != K) {
    for (const char* n : {"flow_consistency", "bellman", "action_gap", "conservation", "feasibility"}) {
      rep.add(check_le(n, nan, tol));
    }
    return rep;
  }

  double consistency = path_flow_mismatch(sol.chi, sol.nu_flow);
  for (std::size_t k = 0; k < K; ++k) {
    consistency = std::max(consistency, w1_distance(project(sol.nu_flow.extended(k)), sol.m_flow[k]));
  }
  rep.add(check_le("flow_consistency", consistency, tol));

  std::vector<Stats> stats(K);
  for (std::size_t k = 0; k < K; ++k) stats[k] = model.summarize(sol.m_flow[k]);
  const GridFunction psi = sol.fixed_terminal ? *sol.fixed_terminal
                                              : terminal_payoff(model, sol.lattice(), sol.m_flow.back());
  const BellmanResult sweep = bellman_B(model, sol.times, stats, psi);
  double bell = 0.0;
  for (std::size_t k = 0; k < K; ++k) bell = std::max(bell, sup_distance(sol.V[k], sweep.values[k]));
  rep.add(check_le("bellman", bell, tol));

  rep.add(check_ge("action_gap", equilibrium_gap(sol, psi), -tol));

  std::vector<double> cons(sol.chi.size(), 0.0);
  parallel_for(sol.chi.size(), [&](std::size_t i) {
    const Trajectory& tr = sol.chi.atoms[i].point;
    const double v0 = sol.V[0](tr[0].x) + tr[0].z;
    double worst = 0.0;
    for (std::size_t k = 1; k < K; ++k) {
      worst = std::max(worst, std::fabs(sol.V[k](tr[k].x) + tr[k].z - v0));
    }
    cons[i] = worst;
  });
  rep.add(check_le("conservation", cons.empty() ? 0.0 : *std::max_element(cons.begin(), cons.end()),
                   tol));

  rep.add(check_le("feasibility", verify_paths(model, sol.chi, sol.nu_flow), tol));
  return rep;
}

}  // namespace mfgv
