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

#include "mfgv/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mfgv/bellman.hpp"
#include "mfgv/error.hpp"
#include "mfgv/fit.hpp"
#include "mfgv/wasserstein.hpp"

namespace mfgv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRoundoff = 1e-12;
constexpr double kExact = 1e-13;

std::mt19937_64 instance_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{seed, stream, std::uint64_t{0x6d667676}};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Running maximum of lhs - bound, reported as one check.
struct Excess {
  double worst = -kInf;
  void add(double lhs, double bound) {
    const double e = lhs - bound;
    worst = std::isnan(e) ? kInf : std::max(worst, e);
  }
};

// Same population with every atom displaced by at most `spread`.
DiscreteMeasure jitter(const DiscreteMeasure& m, double spread, std::mt19937_64& rng) {
  DiscreteMeasure out = m;
  for (auto& a : out.atoms) {
    Coords v{};
    for (int d = 0; d < a.point.dim; ++d) v[static_cast<std::size_t>(d)] = uniform(rng, -spread, spread);
    a.point = translate(a.point, v);
  }
  return out;
}

double sup_w1(const FlowFn& a, const FlowFn& b, const std::vector<double>& times) {
  double w = 0.0;
  for (double t : times) w = std::max(w, w1_distance(a(t), b(t)));
  return w;
}

// Grid times s = i0 dt < r = i1 dt on [0, T] with 1 <= i1 - i0.
std::pair<int, int> grid_interval(std::mt19937_64& rng, int steps) {
  const int i0 = uniform_int(rng, 0, steps - 1);
  const int i1 = uniform_int(rng, i0 + 1, steps);
  return {i0, i1};
}

// Exact to roundoff when every residual is below kExact.
LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y, bool* exact) {
  *exact = std::all_of(y.begin(), y.end(), [](double v) { return v <= kExact; });
  if (*exact) return {0.0, kInf, 1.0};
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::max(y[i], 1e-300)));
  }
  return linear_fit(lx, ly);
}

GridFunction tent(const TorusLattice& lat, double K) {
  return GridFunction::sample(lat, [K](const TorusPoint& x) {
    return K * torus_dist(x, torus_point(0.0));
  });
}

}  // namespace

// -- grid slack ---------------------------------------------------------------

SlackCalibration calibrate_slack() {
  const ModelSpec zero = make_model("zero");
  const ModelSpec motion = make_model("drift-1d", {{"beta", 0.0}});
  const double T = 0.3;
  const auto fn = [](double x) {
    return 0.5 * std::cos(2.0 * std::numbers::pi * x) + 0.2 * std::sin(4.0 * std::numbers::pi * x + 1.0);
  };
  SlackCalibration out;
  for (int n : {32, 64, 128}) {
    SlackLevel lv;
    lv.n = n;
    lv.steps = n / 4;
    lv.h = 1.0 / n;
    lv.dt = T / lv.steps;
    const TorusLattice lat(1, n);
    const GridFunction psi = GridFunction::sample(lat, [&](const TorusPoint& x) { return fn(x[0]); });
    const std::vector<double> times = uniform_times(0.0, T, lv.steps);
    const std::vector<Stats> stats(times.size(), Stats{});
    lv.zero_error = sup_distance(bellman_B(zero, times, stats, psi).initial(), psi);
    const GridFunction v = bellman_B(motion, times, stats, psi).initial();
    const int samples = 20000;
    for (std::size_t i = 0; i < lat.size(); ++i) {
      const double x = lat.node(i)[0];
      double best = -kInf;
      for (int j = 0; j <= samples; ++j) best = std::max(best, fn(x - T + 2.0 * T * j / samples));
      lv.hopf_lax_error = std::max(lv.hopf_lax_error, std::fabs(v.node_value(i) - best));
    }
    out.slack.c_interp =
        std::max(out.slack.c_interp, std::max(lv.zero_error, lv.hopf_lax_error) / (lv.h + lv.dt));
    out.levels.push_back(lv);
  }
  return out;
}

// -- random instances -----------------------------------------------------------

GridFunction random_payoff(const TorusLattice& lattice, std::mt19937_64& rng, double scale,
                           int modes) {
  std::vector<double> c, p, q;
  for (int k = 0; k < modes; ++k) {
    c.push_back(scale * uniform(rng, -1.0, 1.0) / (k + 1));
    p.push_back(uniform(rng, -3.0, 3.0));
    q.push_back(uniform(rng, -3.0, 3.0));
  }
  return GridFunction::sample(lattice, [&](const TorusPoint& x) {
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double w = 2.0 * std::numbers::pi * static_cast<double>(k + 1);
      double term = std::cos(w * x[0] + p[k]);
      if (x.dim == 2) term *= std::cos(w * x[1] + q[k]);
      s += c[k] * term;
    }
    return s;
  });
}

DiscreteMeasure random_measure(int dim, int atoms, std::mt19937_64& rng) {
  if (atoms < 1) throw InvalidArgument("random_measure: need at least one atom");
  DiscreteMeasure m;
  for (int i = 0; i < atoms; ++i) {
    const TorusPoint x = dim == 1 ? torus_point(uniform(rng, 0.0, 1.0))
                                  : torus_point(uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0));
    m.atoms.push_back({x, uniform(rng, 0.1, 1.0)});
  }
  normalize(m);
  return m;
}

DiscreteMeasure random_lattice_measure(const TorusLattice& lattice, int atoms, std::mt19937_64& rng) {
  if (atoms < 1) throw InvalidArgument("random_lattice_measure: need at least one atom");
  std::vector<std::size_t> nodes(lattice.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = i;
  std::shuffle(nodes.begin(), nodes.end(), rng);
  DiscreteMeasure m;
  for (int i = 0; i < atoms; ++i) m.atoms.push_back({lattice.node(nodes[static_cast<std::size_t>(i) % nodes.size()]), 1.0});
  normalize(m);
  return merge_duplicates(m);
}

FlowFn moving_flow(const DiscreteMeasure& m0, double speed, std::mt19937_64& rng) {
  std::vector<Coords> vel;
  for (const auto& a : m0.atoms) {
    Coords v{};
    for (int d = 0; d < a.point.dim; ++d) v[static_cast<std::size_t>(d)] = uniform(rng, -speed, speed);
    vel.push_back(v);
  }
  return [m0, vel](double t) {
    DiscreteMeasure m = m0;
    for (std::size_t i = 0; i < m.atoms.size(); ++i) m.atoms[i].point = translate(m.atoms[i].point, vel[i], t);
    return m;
  };
}

std::vector<Stats> flow_stats(const ModelSpec& model, const FlowFn& flow,
                              const std::vector<double>& times) {
  std::vector<Stats> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(model.summarize(flow(t)));
  return out;
}

// -- properties -----------------------------------------------------------------

PropertyResult action_continuity_property(const LemmaConfig& config) {
  PropertyResult out;
  out.table.columns = {"instance", "dim", "K", "lhs", "bound"};
  Excess ex;
  for (int i = 0; i < config.action_instances; ++i) {
    std::mt19937_64 rng = instance_rng(config.seed, 100000 + static_cast<std::uint64_t>(i));
    const int dim = i % 4 == 3 ? 2 : 1;
    const TorusLattice lat(dim, dim == 1 ? config.lattice_n : 16);
    const GridFunction phi = random_payoff(lat, rng, uniform(rng, 0.05, 1.0));
    const GridFunction phi2 = [&] {
      const GridFunction d = random_payoff(lat, rng, 0.2);
      std::vector<double> v = phi.values();
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += d.node_value(k);
      return GridFunction(lat, std::move(v));
    }();
    const double K = std::max(phi.lipschitz(), phi2.lipschitz());
    const int atoms = uniform_int(rng, 1, 8);
    ExtendedMeasure nu = lift(random_measure(dim, atoms, rng));
    for (auto& a : nu.atoms) a.point.z = uniform(rng, -1.0, 1.0);
    ExtendedMeasure nu2 = i % 2 == 0 ? nu : lift(random_measure(dim, uniform_int(rng, 1, 8), rng));
    for (auto& a : nu2.atoms) {
      if (i % 2 == 0) a.point.x = jitter(dirac(a.point.x), 0.1, rng).atoms[0].point;
      a.point.z = i % 2 == 0 ? a.point.z + uniform(rng, -0.2, 0.2) : uniform(rng, -1.0, 1.0);
    }
    const double lhs = std::fabs(action(phi, nu) - action(phi2, nu2));
    const double bound = sup_distance(phi, phi2) + std::max(K, 1.0) * w1(nu, nu2).distance;
    ex.add(lhs, bound);
    out.table.rows.push_back({static_cast<double>(i), static_cast<double>(dim), K, lhs, bound});
  }
  out.report.add(check_le("action_continuity.bound", ex.worst, kRoundoff));

  // Tight cases on a tent of slope K: translation along the slope, and a
  // shift of the running reward when K <= 1.
  const TorusLattice lat(1, config.lattice_n);
  double tight = 0.0;
  const double h = 1.0 / config.lattice_n;
  for (double K : {0.5, 1.0, 2.0, 3.5}) {
    const GridFunction phi = tent(lat, K);
    const double c = 0.25;
    const GridFunction phi2 = phi.plus(c);
    const double x0 = 4 * h, dx = 6 * h, z0 = 0.3, dz = 0.2;
    const ExtendedMeasure nu{{{{torus_point(x0), z0}, 1.0}}};
    const ExtendedMeasure moved{{{{torus_point(x0 + dx), z0}, 1.0}}};
    const ExtendedMeasure raised{{{{torus_point(x0), z0 + dz}, 1.0}}};
    std::vector<const ExtendedMeasure*> partners;
    if (K >= 1.0) partners.push_back(&moved);
    if (K <= 1.0) partners.push_back(&raised);
    for (const ExtendedMeasure* p : partners) {
      const double lhs = std::fabs(action(phi, nu) - action(phi2, *p));
      const double bound = sup_distance(phi, phi2) + std::max(K, 1.0) * w1(nu, *p).distance;
      tight = std::max(tight, std::fabs(bound - lhs));
      out.table.rows.push_back({-1.0, 1.0, K, lhs, bound});
    }
  }
  out.report.add(check_le("action_continuity.tight", tight, kRoundoff));
  return out;
}

PropertyResult semigroup_property(const ModelSpec& model, const LemmaConfig& config) {
  if (model.dim != 1) throw InvalidArgument("semigroup_property: one-dimensional models only");
  PropertyResult out;
  out.table.columns = {"n", "h", "dt", "residual"};
  const double s = 0.0, r = 0.25, theta = 0.5;
  std::vector<double> hs, res;
  for (int l = 0; l < config.semigroup_levels; ++l) {
    const int n = config.semigroup_n0 << l;
    const double h = 1.0 / n;
    std::mt19937_64 rng = instance_rng(config.seed, 200000);
    const FlowFn flow = moving_flow(random_measure(1, config.atoms, rng), std::min(model.R, 1.0), rng);
    const GridFunction psi = random_payoff(TorusLattice(1, n), rng);
    // dt = 2h on [s, theta]; h on [s, r]; 4h on [r, theta].
    const int direct_steps = static_cast<int>(std::lround((theta - s) * n / 2.0));
    const int first_steps = static_cast<int>(std::lround((r - s) * n));
    const int second_steps = std::max(1, static_cast<int>(std::lround((theta - r) * n / 4.0)));
    const auto t0 = uniform_times(s, theta, direct_steps);
    const auto t1 = uniform_times(s, r, first_steps);
    const auto t2 = uniform_times(r, theta, second_steps);
    const GridFunction direct = bellman_B(model, t0, flow_stats(model, flow, t0), psi).initial();
    const GridFunction mid = bellman_B(model, t2, flow_stats(model, flow, t2), psi).initial();
    const GridFunction comp = bellman_B(model, t1, flow_stats(model, flow, t1), mid).initial();
    const double e = sup_distance(comp, direct);
    hs.push_back(h);
    res.push_back(e);
    out.table.rows.push_back({static_cast<double>(n), h, 2.0 * h, e});
  }
  bool exact = false;
  const LinearFit fit = loglog_fit(hs, res, &exact);
  out.report.add(check_ge("semigroup." + model.name + ".order", fit.slope, config.min_order));
  return out;
}

PropertyResult lipschitz_property(const ModelSpec& model, const LemmaConfig& config,
                                  const SlackModel& slack) {
  PropertyResult out;
  out.table.columns = {"instance", "s", "r", "K", "lip_B", "bound_B", "lip_A", "bound_A",
                       "time_excess"};
  const TorusLattice lat(model.dim, config.lattice_n);
  const double dt = config.T / config.steps;
  const double eps = slack.eps(1.0 / config.lattice_n, dt);
  Excess space, time, frozen;
  for (int i = 0; i < config.instances; ++i) {
    std::mt19937_64 rng = instance_rng(config.seed, 300000 + static_cast<std::uint64_t>(i));
    const GridFunction psi = random_payoff(lat, rng, uniform(rng, 0.1, 1.5));
    const double K = psi.lipschitz();
    const FlowFn flow = moving_flow(random_measure(model.dim, config.atoms, rng), model.R, rng);
    const auto [i0, i1] = grid_interval(rng, config.steps);
    const double s = i0 * dt, r = i1 * dt;
    const auto times = uniform_times(s, r, i1 - i0);
    const BellmanResult B = bellman_B(model, times, flow_stats(model, flow, times), psi);
    double lip_b = 0.0, bound_b = 0.0, time_ex = -kInf;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double lip = B.values[k].lipschitz();
      const double bound = (K + 1.0) * std::exp(model.L * (r - times[k])) - 1.0;
      space.add(lip, bound);
      if (k == 0) {
        lip_b = lip;
        bound_b = bound;
      }
      for (std::size_t j = k + 1; j < times.size(); ++j) {
        const double lhs = sup_distance(B.values[k], B.values[j]);
        const double tb = model.R * (K + 1.0) * std::exp(model.L * (r - times[j])) * (times[j] - times[k]);
        time.add(lhs, tb);
        time_ex = std::max(time_ex, lhs - tb);
      }
    }
    const GridFunction A = frozen_A(model, s, r, flow(s), psi);
    const double bound_a = (K + 1.0) * std::exp(model.L * (r - s)) - 1.0;
    frozen.add(A.lipschitz(), bound_a);
    out.table.rows.push_back(
        {static_cast<double>(i), s, r, K, lip_b, bound_b, A.lipschitz(), bound_a, time_ex});
  }
  out.report.add(check_le("bellman_lipschitz", space.worst, eps));
  out.report.add(check_le("bellman_time_lipschitz", time.worst, eps));
  out.report.add(check_le("frozen_lipschitz", frozen.worst, eps));
  return out;
}

PropertyResult continuity_property(const ModelSpec& model, const LemmaConfig& config,
                                   const SlackModel& slack) {
  PropertyResult out;
  out.table.columns = {"instance", "kind", "lhs", "bound"};
  const TorusLattice lat(model.dim, config.lattice_n);
  const double dt = config.T / config.steps;
  const double eps = slack.eps(1.0 / config.lattice_n, dt);
  const double L = model.L, R = model.R, T = config.T;
  Excess b_cont, a_cont, close;
  const auto perturbed = [&](const GridFunction& psi, std::mt19937_64& rng) {
    const GridFunction d = random_payoff(lat, rng, uniform(rng, 0.0, 0.3));
    std::vector<double> v = psi.values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += d.node_value(k);
    return GridFunction(lat, std::move(v));
  };
  for (int i = 0; i < config.instances; ++i) {
    std::mt19937_64 rng = instance_rng(config.seed, 400000 + static_cast<std::uint64_t>(i));
    const GridFunction psi = random_payoff(lat, rng, uniform(rng, 0.1, 1.5));
    const GridFunction psi2 = perturbed(psi, rng);
    const double K = std::max(psi.lipschitz(), psi2.lipschitz());
    const double dpsi = sup_distance(psi, psi2);
    const DiscreteMeasure m0 = random_measure(model.dim, config.atoms, rng);
    std::mt19937_64 vel = rng;
    const FlowFn flow = moving_flow(m0, R, rng);
    const FlowFn flow2 = i % 3 == 2 ? moving_flow(random_measure(model.dim, config.atoms, vel), R, vel)
                                    : moving_flow(jitter(m0, uniform(rng, 0.0, 0.1), rng), R, vel);

    // B in (r, m, psi): s < r <= r'.
    {
      const auto [i0, i1] = grid_interval(rng, config.steps);
      const int i2 = uniform_int(rng, i1, config.steps);
      const double s = i0 * dt, r = i1 * dt, r2 = i2 * dt;
      const auto t1 = uniform_times(s, r, i1 - i0);
      const auto t2 = uniform_times(s, r2, i2 - i0);
      const GridFunction b1 = bellman_B(model, t1, flow_stats(model, flow, t1), psi).initial();
      const GridFunction b2 = bellman_B(model, t2, flow_stats(model, flow2, t2), psi2).initial();
      const double lhs = sup_distance(b1, b2);
      const double bound = dpsi + (K + 1.0) * R * (r2 - r) +
                           L * (K * std::exp(L * T) + L * T * std::exp(L * T) + 1.0) * (r - s) *
                               sup_w1(flow, flow2, t1);
      b_cont.add(lhs, bound);
      out.table.rows.push_back({static_cast<double>(i), 0.0, lhs, bound});
    }
    // A in (s, m, psi): s, s' < r, arbitrary real times.
    {
      const double r = uniform(rng, 0.05, T);
      const double s = uniform(rng, 0.0, r), s2 = i % 4 == 0 ? s : uniform(rng, 0.0, r);
      const DiscreteMeasure ma = flow(s), mb = flow2(s2);
      const double lhs = sup_distance(frozen_A(model, s, r, ma, psi), frozen_A(model, s2, r, mb, psi2));
      const double sh = std::min(s, s2);
      const double bound =
          dpsi + (K + 1.0) * (L * (r - sh) * w1_distance(ma, mb) + R * std::fabs(s - s2) +
                              model.alpha(s - s2) * (r - sh));
      a_cont.add(lhs, bound);
      out.table.rows.push_back({static_cast<double>(i), 1.0, lhs, bound});
    }
    // Frozen A against B along a flow within delta_1 of m*.
    {
      const auto [i0, i1] = grid_interval(rng, config.steps);
      const double s = i0 * dt, r = i1 * dt;
      const auto times = uniform_times(s, r, i1 - i0);
      const DiscreteMeasure m_star = i % 2 == 0 ? flow(s) : flow2(s);
      double delta = 0.0;
      for (double t : times) delta = std::max(delta, w1_distance(flow(t), m_star));
      const double lhs = sup_distance(frozen_A(model, s, r, m_star, psi),
                                      bellman_B(model, times, flow_stats(model, flow, times), psi2).initial());
      const double bound =
          (K + 1.0) * (model.alpha(r - s) + L * R * (r - s) + L * delta) * (r - s) + dpsi;
      close.add(lhs, bound);
      out.table.rows.push_back({static_cast<double>(i), 2.0, lhs, bound});
    }
  }
  out.report.add(check_le("bellman_continuity", b_cont.worst, eps));
  out.report.add(check_le("frozen_continuity", a_cont.worst, eps));
  out.report.add(check_le("frozen_vs_bellman", close.worst, eps));

  // ||A - B|| as r -> s on lattice-aligned horizons of 2, 4, 8, 16 steps dt = h.
  double worst_slope = kInf, worst_r2 = kInf;
  const int rate_instances = std::min(config.instances, 10);
  const double h = 1.0 / config.lattice_n;
  for (int i = 0; i < rate_instances; ++i) {
    std::mt19937_64 rng = instance_rng(config.seed, 500000 + static_cast<std::uint64_t>(i));
    const GridFunction psi = random_payoff(lat, rng, uniform(rng, 0.3, 1.5));
    const FlowFn flow = moving_flow(random_measure(model.dim, config.atoms, rng), R, rng);
    const double s = uniform_int(rng, 0, config.lattice_n / 2) * h;
    std::vector<double> taus, diffs;
    for (int k : {2, 4, 8, 16}) {
      const double tau = k * h;
      const auto times = uniform_times(s, s + tau, k);
      const double d = sup_distance(frozen_A(model, s, s + tau, flow(s), psi),
                                    bellman_B(model, times, flow_stats(model, flow, times), psi).initial());
      taus.push_back(tau);
      diffs.push_back(d);
      out.table.rows.push_back({static_cast<double>(i), 3.0, d, tau});
    }
    bool exact = false;
    const LinearFit fit = loglog_fit(taus, diffs, &exact);
    worst_slope = std::min(worst_slope, fit.slope);
    worst_r2 = std::min(worst_r2, fit.r2);
  }
  out.report.add(check_ge("frozen_vs_bellman_rate.slope", worst_slope, config.min_order));
  out.report.add(check_ge("frozen_vs_bellman_rate.r2", worst_r2, config.min_r2));
  return out;
}

PropertyResult necessity_property(const ModelSpec& model, const MFGSolution& sol,
                                  const LemmaConfig& config, const SlackModel& slack) {
  if (sol.times.size() < 2 || sol.V.size() != sol.times.size() || sol.chi.atoms.empty()) {
    throw InvalidArgument("necessity_property: incomplete solution");
  }
  const std::size_t steps = sol.times.size() - 1;
  PropertyResult out;
  out.table.columns = {"s", "r", "frozen", "frozen_bound", "infeasibility", "feasibility_bound",
                       "pushforward", "action"};
  double C = 0.0;
  for (const auto& v : sol.V) C = std::max(C, v.lipschitz());
  const double dt = (sol.times.back() - sol.times.front()) / static_cast<double>(steps);
  const double eps = slack.eps(1.0 / sol.V.front().n(), dt);
  const double L = model.L, R = model.R;
  Excess frozen, feas, push;
  double act = kInf;
  const std::size_t lengths[] = {1, 2, 4, 8};
  for (int j = 0; j < config.necessity_pairs; ++j) {
    const std::size_t len = std::min(lengths[j % 4], steps);
    const std::size_t i0 = (static_cast<std::size_t>(j) * 7) % (steps - len + 1), i1 = i0 + len;
    const double s = sol.times[i0], r = sol.times[i1], tau = r - s;
    const VelocityPlan beta = finite_difference_plan(sol.chi, s, r);
    const double fa = sup_distance(frozen_A(model, s, r, sol.m_flow[i0], sol.V[i1]), sol.V[i0]);
    const double fb = (C + 1.0) * (model.alpha(tau) + 2.0 * L * R * tau) * tau;
    const double inf = plan_infeasibility(model, beta, s, sol.m_flow[i0]);
    const double ib = model.alpha(tau) + 4.0 * L * R * tau;
    const double pw = w1(shift_xi(beta, tau), sol.nu_flow.extended(i1)).distance;
    const double ac = action(sol.V[i1], shift_theta(beta, tau)) - action(sol.V[i0], lift(sol.m_flow[i0]));
    frozen.add(fa, fb);
    feas.add(inf, ib);
    push.add(pw, 0.0);
    act = std::min(act, ac);
    out.table.rows.push_back({s, r, fa, fb, inf, ib, pw, ac});
  }
  out.report.add(check_le("necessity_frozen", frozen.worst, eps));
  out.report.add(check_le("necessity_feasibility", feas.worst, eps));
  out.report.add(check_le("necessity_pushforward", push.worst, 1e-9));
  out.report.add(check_ge("necessity_action", act, -config.action_tol));
  return out;
}

PropertyResult chain_property(const ModelSpec& model,
                              const std::vector<std::pair<int, ChainResult>>& chains,
                              const ChainThresholds& thresholds) {
  PropertyResult out;
  out.table.columns = {"N", "step", "s", "r", "drift", "accumulated", "drift_bound"};
  for (const auto& [N, cr] : chains) {
    if (cr.steps.empty()) throw InvalidArgument("chain_property: empty chain");
    const double t_star = cr.steps.front().s;
    Excess drift;
    double acc = 0.0;
    for (std::size_t j = 0; j < cr.steps.size(); ++j) {
      const ChainStep& st = cr.steps[j];
      const double tau = st.r - st.s;
      acc += st.drift;
      const double bound = (st.r - t_star) * (model.alpha(tau) + 4.0 * model.L * model.R * tau);
      drift.add(acc, bound);
      out.table.rows.push_back(
          {static_cast<double>(N), static_cast<double>(j), st.s, st.r, st.drift, acc, bound});
    }
    const std::string p = "chain.N" + std::to_string(N) + ".";
    out.report.add(check_le(p + "drift", drift.worst, kRoundoff));
    out.report.add(check_le(p + "backward", cr.backward, thresholds.backward / N));
    out.report.add(check_ge(p + "action", cr.action_gap, -thresholds.action / N));
  }
  return out;
}

LemmaSuite run_lemmas(const ModelSpec& model, const LemmaConfig& config, const MFGSolution* sol) {
  LemmaSuite out;
  out.calibration = calibrate_slack();
  const SlackModel& slack = out.calibration.slack;
  const auto take = [&](const std::string& name, PropertyResult res) {
    out.report.append(res.report);
    out.tables[name] = std::move(res.table);
  };
  take("action_continuity", action_continuity_property(config));
  if (model.dim == 1) {
    take("semigroup_" + model.name, semigroup_property(model, config));
    const ModelSpec other = make_model(model.name == "drift-1d" ? "crowd-aversion-1d" : "drift-1d");
    take("semigroup_" + other.name, semigroup_property(other, config));
  }
  take("lipschitz", lipschitz_property(model, config, slack));
  take("continuity", continuity_property(model, config, slack));

  MFGSolution fresh;
  if (sol == nullptr) {
    std::mt19937_64 rng = instance_rng(config.seed, 600000);
    const DiscreteMeasure m0 =
        random_lattice_measure(TorusLattice(model.dim, config.lattice_n), config.atoms, rng);
    MfgOptions o;
    o.steps = config.steps;
    o.lattice_n = config.lattice_n;
    fresh = solve_mfg(model, 0.0, config.T, m0, o);
    sol = &fresh;
  }
  take("necessity", necessity_property(model, *sol, config, slack));
  return out;
}

}  // namespace mfgv
