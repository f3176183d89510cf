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

#include "mfgv/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "mfgv/error.hpp"
#include "mfgv/gamedyn.hpp"
#include "mfgv/lemmas.hpp"
#include "mfgv/mfg.hpp"
#include "mfgv/parallel.hpp"
#include "mfgv/viability.hpp"
#include "mfgv/wasserstein.hpp"

namespace mfgv {
namespace {

namespace fs = std::filesystem;

constexpr double kInf = std::numeric_limits<double>::infinity();

// -- strict JSON reading --------------------------------------------------------

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw InvalidArgument(where.empty() ? "config: " + what : "config: " + where + ": " + what);
}

const Json& object_at(const Json& j, const std::string& where) {
  if (!j.is_object()) config_error(where, "expected an object");
  return j;
}

void allow_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) config_error(where, "unknown key '" + it.key() + "'");
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double as_double(const Json& v, const std::string& where) {
  if (!v.is_number()) config_error(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) config_error(where, "not finite");
  return d;
}

int as_int(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) config_error(where, "expected an integer");
  const auto i = v.get<std::int64_t>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
    config_error(where, "out of range");
  return static_cast<int>(i);
}

std::uint64_t as_u64(const Json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  config_error(where, "expected a nonnegative integer");
}

bool as_bool(const Json& v, const std::string& where) {
  if (!v.is_boolean()) config_error(where, "expected a boolean");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& where) {
  if (!v.is_string()) config_error(where, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_doubles(const Json& v, const std::string& where) {
  if (!v.is_array()) config_error(where, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_double(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

template <class T, class F>
void read(const Json& obj, const char* key, T& out, const std::string& where, F convert) {
  if (auto it = obj.find(key); it != obj.end()) out = convert(*it, join(where, key));
}

void require_positive(double v, const std::string& where) {
  if (!(v > 0.0)) config_error(where, "must be > 0");
}

// -- output helpers -------------------------------------------------------------

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const fs::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot write " + path.string());
  for (std::size_t i = 0; i < columns.size(); ++i) f << (i ? "," : "") << columns[i];
  f << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
    f << "\n";
  }
  if (!f) throw InvalidArgument("cannot write " + path.string());
}

void write_table(const fs::path& path, const Table& t) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : t.rows) {
    std::vector<std::string> s;
    for (double v : r) s.push_back(fmt(v));
    rows.push_back(std::move(s));
  }
  write_csv(path, t.columns, rows);
}

std::string file_safe(const std::string& name) {
  std::string s = name;
  for (char& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  return s;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double worst_residual(const Report& rep) {
  double w = 0.0;
  for (const auto& c : rep.checks) w = std::max(w, std::isnan(c.residual) ? kInf : std::fabs(c.residual));
  return w;
}

// -- running ----------------------------------------------------------------------

struct Context {
  const ScenarioConfig& cfg;
  ModelSpec model;
  fs::path out;
  Report report;
  Json results = Json::object();
  Json timings = Json::object();

  template <class F>
  auto timed(const std::string& phase, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Stop {
      Context& ctx;
      std::string phase;
      std::chrono::steady_clock::time_point t0;
      ~Stop() {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ctx.timings[phase] = ctx.timings.value(phase, 0.0) + s;
      }
    } stop{*this, phase, t0};
    return f();
  }

  std::string input(const std::string& path) const {
    const fs::path p(path);
    return (p.is_absolute() ? p : fs::path(cfg.base_dir) / p).string();
  }
};

MfgOptions solver_options(const ScenarioConfig& cfg) {
  MfgOptions o;
  o.steps = cfg.steps;
  o.lattice_n = cfg.lattice_n;
  o.tol = cfg.tol_flow;
  return o;
}

DiscreteMeasure initial_measure(const Context& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  std::mt19937_64 rng(cfg.seed);
  if (cfg.initial == "file") {
    const DiscreteMeasure m = measure_from_json(read_json(ctx.input(cfg.initial_path)));
    if (measure_dim(m) != ctx.model.dim)
      throw InvalidArgument("initial measure dimension does not match the model");
    return m;
  }
  if (cfg.initial == "random") return random_measure(ctx.model.dim, cfg.particles, rng);
  return random_lattice_measure(TorusLattice(ctx.model.dim, cfg.lattice_n), cfg.particles, rng);
}

MFGSolution fresh_solution(Context& ctx) {
  const DiscreteMeasure m0 = initial_measure(ctx);
  MFGSolution sol = ctx.timed("solve", [&] {
    return solve_mfg(ctx.model, ctx.cfg.t0, ctx.cfg.T, m0, solver_options(ctx.cfg));
  });
  ctx.timed("save", [&] { save_solution(sol, (ctx.out / "solution").string()); });
  ctx.results["solution_dir"] = "solution";
  return sol;
}

MFGSolution obtain_solution(Context& ctx) {
  if (ctx.cfg.solution.empty()) return fresh_solution(ctx);
  ctx.results["solution_dir"] = ctx.cfg.solution;
  return ctx.timed("load", [&] { return load_solution(ctx.input(ctx.cfg.solution)); });
}

double grid_dt(const MFGSolution& sol) { return sol.times[1] - sol.times[0]; }

int interval_steps(const MFGSolution& sol, double s, double r) {
  return std::max(1, static_cast<int>(std::lround((r - s) / grid_dt(sol))));
}

std::vector<std::pair<double, double>> intervals_of(const ScenarioConfig& cfg) {
  if (!cfg.intervals.empty()) return cfg.intervals;
  std::vector<std::pair<double, double>> out;
  const double len = (cfg.T - cfg.t0) / 4.0;
  for (int i = 0; i < 4; ++i) out.push_back({cfg.t0 + i * len, i == 3 ? cfg.T : cfg.t0 + (i + 1) * len});
  return out;
}

Json residuals_json(const MfgResiduals& r) {
  return {{"flow", r.flow},
          {"refine_shift", r.refine_shift},
          {"max_regret", r.max_regret},
          {"gap", r.gap},
          {"iterations", r.iterations},
          {"refinements", r.refinements},
          {"converged", r.converged}};
}

void write_trace(const fs::path& path, const MFGSolution& sol) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    const auto& v = sol.V[k].values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    rows.push_back({fmt(sol.times[k]), fmt(w1_distance(sol.m_flow[k], sol.m0)),
                    fmt(total_mass(sol.m_flow[k])), fmt(*lo), fmt(*hi)});
  }
  write_csv(path, {"t", "w1_to_m0", "mass", "V_min", "V_max"}, rows);
}

void add_verification(Context& ctx, const MFGSolution& sol) {
  const Report v = ctx.timed("verify", [&] { return verify_solution(ctx.model, sol, ctx.cfg.tol_verify); });
  ctx.report.append(v);
  ctx.results["mfg_residuals"] = residuals_json(sol.residuals);
  ctx.timed("tables", [&] { write_trace(ctx.out / "trace.csv", sol); });
}

// -- subcommands --------------------------------------------------------------------

void run_solve(Context& ctx) {
  const MFGSolution sol = fresh_solution(ctx);
  add_verification(ctx, sol);
  ctx.report.add(check_le("flow_residual", sol.residuals.flow, ctx.cfg.tol_flow));
  ctx.report.add(check_le("gap", std::fabs(sol.residuals.gap), ctx.cfg.tol_flow));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < sol.residuals.history.size(); ++i)
    rows.push_back({std::to_string(i + 1), fmt(sol.residuals.history[i])});
  write_csv(ctx.out / "history.csv", {"iteration", "flow_residual"}, rows);
}

void run_verify(Context& ctx) { add_verification(ctx, obtain_solution(ctx)); }

void run_psi(Context& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  const MFGSolution sol = obtain_solution(ctx);
  const auto iv = intervals_of(cfg);
  const fs::path steps_dir = ctx.out / "steps";
  fs::create_directories(steps_dir);
  std::vector<PsiStep> restricted;
  std::vector<std::vector<std::string>> rows;
  ctx.timed("psi", [&] {
    for (std::size_t i = 0; i < iv.size(); ++i) {
      const std::string tag = "interval" + std::to_string(i) + ".";
      PsiStep st = restrict_solution(sol, iv[i].first, iv[i].second);
      st.residuals = psi_check(ctx.model, st, cfg.tol_psi);
      ctx.report.append(st.residuals, tag + "restricted.");
      save_step(st, (steps_dir / ("restricted_" + std::to_string(i))).string());

      MfgOptions o = solver_options(cfg);
      o.steps = interval_steps(sol, st.s, st.r);
      o.lattice_n = sol.lattice().n();
      const PsiGeneration gen = psi_generate(ctx.model, st.s, st.r, st.m, st.phi, {st.psi}, cfg.tol_psi, o);
      ctx.report.append(gen.tried.front().residuals, tag + "generated.");
      if (!gen.steps.empty()) save_step(gen.steps.front(), (steps_dir / ("generated_" + std::to_string(i))).string());

      const auto [left, right] = split_step(ctx.model, st, 0.5 * (st.s + st.r));
      ctx.report.append(psi_check(ctx.model, left, cfg.tol_psi), tag + "split.left.");
      ctx.report.append(psi_check(ctx.model, right, cfg.tol_psi), tag + "split.right.");
      rows.push_back({std::to_string(i), fmt(st.s), fmt(st.r), fmt(st.residuals.at("bellman").residual),
                      fmt(gen.bellman.front()), fmt(gen.action.front())});
      restricted.push_back(std::move(st));
    }
    for (std::size_t i = 0; i + 1 < restricted.size(); ++i) {
      if (std::fabs(restricted[i].r - restricted[i + 1].s) > 1e-12) continue;
      const std::string tag = "compose" + std::to_string(i) + ".";
      const PsiStep c = compose_steps(ctx.model, restricted[i], restricted[i + 1], cfg.tol_psi);
      ctx.report.append(psi_check(ctx.model, c, cfg.tol_psi), tag);
    }
  });
  write_csv(ctx.out / "psi.csv",
            {"interval", "s", "r", "restricted_bellman", "generated_bellman", "generated_action"}, rows);
}

void run_viability(Context& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  const MFGSolution sol = obtain_solution(ctx);
  const ValueMultifunction V = ValueMultifunction::from_solution(sol);
  const auto iv = intervals_of(cfg);
  std::vector<std::vector<std::string>> rows;
  ctx.timed("viability", [&] {
    for (std::size_t i = 0; i < iv.size(); ++i) {
      const double s = V.nearest_time(iv[i].first), r = V.nearest_time(iv[i].second);
      MfgOptions o = solver_options(cfg);
      o.steps = interval_steps(sol, s, r);
      o.lattice_n = sol.lattice().n();
      const Report rep = viability_check(ctx.model, V, s, r, cfg.tol_psi, o);
      ctx.report.append(rep, "interval" + std::to_string(i) + ".");
      rows.push_back({std::to_string(i), fmt(s), fmt(r), fmt(worst_residual(rep)), rep.pass() ? "1" : "0"});
    }
  });
  write_csv(ctx.out / "viability.csv", {"interval", "s", "r", "worst_residual", "pass"}, rows);
}

void run_derivative(Context& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  const MFGSolution sol = obtain_solution(ctx);
  const ValueMultifunction V = ValueMultifunction::from_solution(sol);
  const double dt = grid_dt(sol);
  const std::size_t K = sol.times.size() - 1;
  const std::vector<double> tau = cfg.tau_seq.empty() ? std::vector<double>{4 * dt, 2 * dt, dt} : cfg.tau_seq;
  std::vector<std::size_t> ks;
  const std::size_t reach = static_cast<std::size_t>(std::ceil(tau.front() / dt - 1e-9));
  if (reach > K) throw InvalidArgument("derivative: tau_seq exceeds the horizon");
  if (cfg.points.empty()) {
    for (int j = 0; j < 10; ++j) ks.push_back(static_cast<std::size_t>(std::lround(j * double(K - reach) / 9.0)));
  } else {
    for (double t : cfg.points) ks.push_back(nearest_time_index(sol.times, t));
  }
  for (std::size_t k : ks)
    if (k + reach > K) throw InvalidArgument("derivative: point too close to the horizon for tau_seq");

  DerivativeOptions d;
  d.c = cfg.c;
  d.tau_seq = tau;
  d.tol = cfg.tol_deriv;
  const double c = cfg.c > 0 ? cfg.c : ctx.model.R;
  std::vector<std::vector<std::string>> rows;
  auto record = [&](const std::string& point, double t, const DerivativeWitness& w) {
    for (const auto& r : w.records)
      rows.push_back({point, fmt(t), fmt(r.tau), fmt(r.q), fmt(r.p), fmt(r.lookup_w1), fmt(r.lookup_dt)});
  };
  Json points = Json::array();
  ctx.timed("derivative", [&] {
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const std::size_t k = ks[j];
      const VelocityPlan seed = finite_difference_plan(sol.chi, sol.times[k], sol.times[k + 1]);
      d.seed = &seed;
      const DerivativeWitness w = derivative_test(ctx.model, V, sol.times[k], sol.m_flow[k], sol.V[k], d);
      const std::string tag = "point" + std::to_string(j) + ".";
      ctx.report.add(check_le(tag + "q_limit", w.q_limit, cfg.tol_deriv));
      ctx.report.add(check_ge(tag + "p_limit", w.p_limit, -cfg.tol_deriv));
      ctx.report.add(check_le(tag + "radius", w.radius, c + 1e-12));
      points.push_back({{"t", sol.times[k]}, {"found", w.found}, {"q_limit", w.q_limit},
                        {"p_limit", w.p_limit}, {"infeasibility", w.infeasibility}, {"radius", w.radius}});
      record(std::to_string(j), sol.times[k], w);
    }
    if (cfg.fault) {
      const std::size_t k = ks[ks.size() / 2];
      ValueMultifunction bad = V;
      bad.sample(k).values = {sol.V[k].plus(1.0)};
      const VelocityPlan seed = finite_difference_plan(sol.chi, sol.times[k], sol.times[k + 1]);
      d.seed = &seed;
      const DerivativeWitness w =
          derivative_test(ctx.model, bad, sol.times[k], sol.m_flow[k], sol.V[k].plus(1.0), d);
      // The fault must be detected: no witness, and q growing like 1 / tau.
      ctx.report.add(check_ge("fault.empty", w.found ? 0.0 : 1.0, 1.0));
      ctx.report.add(check_ge("fault.q_limit", w.q_limit, cfg.tol_deriv));
      const double growth = w.records.back().q / w.records.front().q;
      ctx.report.add(check_ge("fault.q_growth", growth, 0.5 * tau.front() / tau.back()));
      ctx.results["fault"] = {{"t", sol.times[k]}, {"found", w.found}, {"q_limit", w.q_limit},
                              {"q_growth", growth}};
      record("fault", sol.times[k], w);
    }
  });
  ctx.results["points"] = points;
  write_csv(ctx.out / "derivative.csv", {"point", "t", "tau", "q", "p", "lookup_w1", "lookup_dt"}, rows);
}

std::vector<std::pair<int, ChainResult>> run_chains(Context& ctx, const MFGSolution& sol) {
  const ScenarioConfig& cfg = ctx.cfg;
  const ValueMultifunction V = ValueMultifunction::from_solution(sol);
  ChainOptions co;
  co.mfg = solver_options(cfg);
  co.mfg.steps = static_cast<int>(sol.times.size()) - 1;
  co.mfg.lattice_n = sol.lattice().n();
  co.tol = cfg.tol_psi;
  co.verify_tol = cfg.tol_chain;
  std::vector<std::pair<int, ChainResult>> out;
  ctx.timed("chain", [&] {
    for (int N : cfg.chain_N)
      out.emplace_back(N, chain_solve(ctx.model, V, sol.t0(), sol.m0, sol.V.front(), N, co));
  });
  return out;
}

void run_chain(Context& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  const MFGSolution sol = obtain_solution(ctx);
  const auto chains = run_chains(ctx, sol);
  std::vector<std::vector<std::string>> rows, step_rows;
  double prev = kInf, increase = -kInf, last = kInf;
  Json per_n = Json::array();
  for (const auto& [N, cr] : chains) {
    const double w = worst_residual(cr.verify);
    increase = std::max(increase, w - prev);
    prev = last = w;
    for (const auto& c : cr.verify.checks)
      rows.push_back({std::to_string(N), c.name, fmt(c.residual), fmt(c.bound), c.pass ? "1" : "0"});
    for (std::size_t j = 0; j < cr.steps.size(); ++j) {
      const ChainStep& st = cr.steps[j];
      step_rows.push_back({std::to_string(N), std::to_string(j), fmt(st.s), fmt(st.r), fmt(st.bellman),
                           fmt(st.membership), fmt(st.drift)});
    }
    per_n.push_back({{"N", N}, {"worst_residual", w}, {"backward", cr.backward},
                     {"action_gap", cr.action_gap}, {"verify", to_json(cr.verify)}});
  }
  ctx.results["chains"] = per_n;
  // Largest increase of the worst verification residual from one N to the next.
  ctx.report.add(check_le("monotone", chains.size() > 1 ? increase : 0.0, 0.0));
  ctx.report.add(check_le("final_residual", last, cfg.tol_chain));
  const PropertyResult inv = chain_property(ctx.model, chains);
  ctx.report.append(inv.report);
  write_csv(ctx.out / "chain.csv", {"N", "check", "residual", "bound", "pass"}, rows);
  write_csv(ctx.out / "chain_steps.csv", {"N", "step", "s", "r", "bellman", "membership", "drift"},
            step_rows);
  write_table(ctx.out / "chain_invariants.csv", inv.table);
}

void run_lemmas_sub(Context& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  const MFGSolution sol = obtain_solution(ctx);
  LemmaConfig lc;
  lc.lattice_n = cfg.lattice_n;
  lc.steps = cfg.steps;
  lc.T = cfg.T - cfg.t0;
  lc.instances = cfg.lemma_instances;
  lc.action_instances = cfg.lemma_action_instances;
  lc.atoms = cfg.particles;
  lc.semigroup_n0 = cfg.semigroup_n0;
  lc.semigroup_levels = cfg.semigroup_levels;
  lc.necessity_pairs = cfg.lemma_necessity_pairs;
  lc.seed = cfg.seed;
  const LemmaSuite suite = ctx.timed("lemmas", [&] { return run_lemmas(ctx.model, lc, &sol); });
  ctx.report.append(suite.report);
  for (const auto& [name, table] : suite.tables) write_table(ctx.out / ("lemmas_" + file_safe(name) + ".csv"), table);
  Table cal{{"n", "steps", "h", "dt", "zero_error", "hopf_lax_error"}, {}};
  for (const auto& l : suite.calibration.levels)
    cal.rows.push_back({double(l.n), double(l.steps), l.h, l.dt, l.zero_error, l.hopf_lax_error});
  write_table(ctx.out / "calibration.csv", cal);
  const double h = 1.0 / cfg.lattice_n, dt = lc.T / cfg.steps;
  ctx.results["c_interp"] = suite.calibration.slack.c_interp;
  ctx.results["eps_grid"] = suite.calibration.slack.eps(h, dt);
  if (cfg.lemma_chains) {
    const PropertyResult inv = chain_property(ctx.model, run_chains(ctx, sol));
    ctx.report.append(inv.report);
    write_table(ctx.out / "lemmas_chain.csv", inv.table);
  }
}

void run_w1(Context& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  if (cfg.w1_a.empty() || cfg.w1_b.empty()) throw InvalidArgument("w1: both w1.a and w1.b are required");
  const DiscreteMeasure a = measure_from_json(read_json(ctx.input(cfg.w1_a)));
  const DiscreteMeasure b = measure_from_json(read_json(ctx.input(cfg.w1_b)));
  const auto res = ctx.timed("w1", [&] { return w1(a, b); });
  double cost = 0.0;
  std::vector<std::vector<std::string>> rows;
  const int dim = measure_dim(a);
  for (const auto& p : res.plan.atoms) {
    cost += p.weight * torus_dist(p.left, p.right);
    std::vector<std::string> r;
    for (int i = 0; i < dim; ++i) r.push_back(fmt(p.left[i]));
    for (int i = 0; i < dim; ++i) r.push_back(fmt(p.right[i]));
    r.push_back(fmt(p.weight));
    rows.push_back(std::move(r));
  }
  ctx.report.add(check_le("plan_cost", std::fabs(cost - res.distance), 1e-12));
  ctx.report.add(check_le("marginal_a", w1_distance(left_marginal(res.plan), a), 1e-9));
  ctx.report.add(check_le("marginal_b", w1_distance(right_marginal(res.plan), b), 1e-9));
  ctx.results["distance"] = res.distance;
  ctx.results["atoms"] = {a.size(), b.size()};
  std::vector<std::string> cols;
  for (int i = 0; i < dim; ++i) cols.push_back("from_x" + std::to_string(i));
  for (int i = 0; i < dim; ++i) cols.push_back("to_x" + std::to_string(i));
  cols.push_back("weight");
  write_csv(ctx.out / "w1_plan.csv", cols, rows);
}

const std::vector<std::pair<std::string, void (*)(Context&)>>& dispatch() {
  static const std::vector<std::pair<std::string, void (*)(Context&)>> table = {
      {"solve", run_solve},           {"verify", run_verify},     {"psi", run_psi},
      {"viability", run_viability},   {"derivative", run_derivative}, {"chain", run_chain},
      {"lemmas", run_lemmas_sub},     {"w1", run_w1}};
  return table;
}

Json tolerances_json(const ScenarioConfig& cfg) {
  return {{"tol_flow", cfg.tol_flow}, {"tol_verify", cfg.tol_verify}, {"tol_psi", cfg.tol_psi},
          {"tol_deriv", cfg.tol_deriv}, {"tol_chain", cfg.tol_chain}, {"tau_seq", cfg.tau_seq}};
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

// -- configuration --------------------------------------------------------------

ScenarioConfig parse_config(const Json& j, const std::string& base_dir) {
  ScenarioConfig c;
  c.base_dir = base_dir;
  object_at(j, "");
  allow_keys(j, {"model", "grid", "particles", "initial", "tolerances", "seed", "threads", "out",
                 "solution", "intervals", "derivative", "chain", "lemmas", "w1"},
             "");
  if (auto it = j.find("model"); it != j.end()) {
    const Json& m = object_at(*it, "model");
    allow_keys(m, {"preset", "params"}, "model");
    read(m, "preset", c.preset, "model", as_string);
    if (auto p = m.find("params"); p != m.end()) {
      object_at(*p, "model.params");
      for (auto q = p->begin(); q != p->end(); ++q) c.params[q.key()] = as_double(*q, "model.params." + q.key());
    }
  }
  if (auto it = j.find("grid"); it != j.end()) {
    const Json& g = object_at(*it, "grid");
    allow_keys(g, {"n", "steps", "t0", "T"}, "grid");
    read(g, "n", c.lattice_n, "grid", as_int);
    read(g, "steps", c.steps, "grid", as_int);
    read(g, "t0", c.t0, "grid", as_double);
    read(g, "T", c.T, "grid", as_double);
  }
  read(j, "particles", c.particles, "", as_int);
  if (auto it = j.find("initial"); it != j.end()) {
    const Json& i = object_at(*it, "initial");
    allow_keys(i, {"kind", "path"}, "initial");
    read(i, "kind", c.initial, "initial", as_string);
    read(i, "path", c.initial_path, "initial", as_string);
  }
  if (auto it = j.find("tolerances"); it != j.end()) {
    const Json& t = object_at(*it, "tolerances");
    allow_keys(t, {"tol_flow", "tol_verify", "tol_psi", "tol_deriv", "tol_chain", "tau_seq"}, "tolerances");
    read(t, "tol_flow", c.tol_flow, "tolerances", as_double);
    read(t, "tol_verify", c.tol_verify, "tolerances", as_double);
    read(t, "tol_psi", c.tol_psi, "tolerances", as_double);
    read(t, "tol_deriv", c.tol_deriv, "tolerances", as_double);
    read(t, "tol_chain", c.tol_chain, "tolerances", as_double);
    read(t, "tau_seq", c.tau_seq, "tolerances", as_doubles);
  }
  read(j, "seed", c.seed, "", as_u64);
  read(j, "threads", c.threads, "", as_int);
  read(j, "out", c.out, "", as_string);
  read(j, "solution", c.solution, "", as_string);
  if (auto it = j.find("intervals"); it != j.end()) {
    if (!it->is_array()) config_error("intervals", "expected an array of [s, r] pairs");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "intervals[" + std::to_string(i) + "]";
      const std::vector<double> p = as_doubles((*it)[i], where);
      if (p.size() != 2) config_error(where, "expected [s, r]");
      c.intervals.push_back({p[0], p[1]});
    }
  }
  if (auto it = j.find("derivative"); it != j.end()) {
    const Json& d = object_at(*it, "derivative");
    allow_keys(d, {"points", "fault", "c"}, "derivative");
    read(d, "points", c.points, "derivative", as_doubles);
    read(d, "fault", c.fault, "derivative", as_bool);
    read(d, "c", c.c, "derivative", as_double);
  }
  if (auto it = j.find("chain"); it != j.end()) {
    const Json& ch = object_at(*it, "chain");
    allow_keys(ch, {"N"}, "chain");
    if (auto n = ch.find("N"); n != ch.end()) {
      if (!n->is_array()) config_error("chain.N", "expected an array");
      c.chain_N.clear();
      for (std::size_t i = 0; i < n->size(); ++i) c.chain_N.push_back(as_int((*n)[i], "chain.N"));
    }
  }
  if (auto it = j.find("lemmas"); it != j.end()) {
    const Json& l = object_at(*it, "lemmas");
    allow_keys(l, {"instances", "action_instances", "necessity_pairs", "semigroup_n0", "semigroup_levels",
                   "chains"},
               "lemmas");
    read(l, "instances", c.lemma_instances, "lemmas", as_int);
    read(l, "action_instances", c.lemma_action_instances, "lemmas", as_int);
    read(l, "necessity_pairs", c.lemma_necessity_pairs, "lemmas", as_int);
    read(l, "semigroup_n0", c.semigroup_n0, "lemmas", as_int);
    read(l, "semigroup_levels", c.semigroup_levels, "lemmas", as_int);
    read(l, "chains", c.lemma_chains, "lemmas", as_bool);
  }
  if (auto it = j.find("w1"); it != j.end()) {
    const Json& w = object_at(*it, "w1");
    allow_keys(w, {"a", "b"}, "w1");
    read(w, "a", c.w1_a, "w1", as_string);
    read(w, "b", c.w1_b, "w1", as_string);
  }

  // Validation.
  try {
    make_model(c.preset, c.params);
  } catch (const Error& e) {
    config_error("model", e.what());
  }
  if (c.lattice_n < 2) config_error("grid.n", "must be >= 2");
  if (c.steps < 1) config_error("grid.steps", "must be >= 1");
  if (!(c.T > c.t0)) config_error("grid", "horizon [t0, T] must be nonempty");
  if (c.particles < 1) config_error("particles", "must be >= 1");
  if (c.initial != "lattice" && c.initial != "random" && c.initial != "file")
    config_error("initial.kind", "expected lattice, random or file");
  if (c.initial == "file" && c.initial_path.empty()) config_error("initial.path", "required for kind file");
  require_positive(c.tol_flow, "tolerances.tol_flow");
  require_positive(c.tol_verify, "tolerances.tol_verify");
  require_positive(c.tol_psi, "tolerances.tol_psi");
  require_positive(c.tol_deriv, "tolerances.tol_deriv");
  require_positive(c.tol_chain, "tolerances.tol_chain");
  for (std::size_t i = 0; i < c.tau_seq.size(); ++i) {
    require_positive(c.tau_seq[i], "tolerances.tau_seq");
    if (i > 0 && !(c.tau_seq[i] < c.tau_seq[i - 1])) config_error("tolerances.tau_seq", "must be decreasing");
  }
  if (c.tau_seq.size() == 1) config_error("tolerances.tau_seq", "needs at least two values");
  if (c.threads < 0) config_error("threads", "must be >= 0");
  if (c.out.empty()) config_error("out", "must be nonempty");
  for (const auto& [s, r] : c.intervals)
    if (!(c.t0 <= s && s < r && r <= c.T)) config_error("intervals", "need t0 <= s < r <= T");
  for (double t : c.points)
    if (!(c.t0 <= t && t < c.T)) config_error("derivative.points", "need t0 <= t < T");
  if (c.c < 0.0) config_error("derivative.c", "must be >= 0");
  if (c.chain_N.empty()) config_error("chain.N", "must be nonempty");
  for (std::size_t i = 0; i < c.chain_N.size(); ++i) {
    if (c.chain_N[i] < 1) config_error("chain.N", "must be >= 1");
    if (i > 0 && c.chain_N[i] <= c.chain_N[i - 1]) config_error("chain.N", "must be increasing");
  }
  for (auto [v, name] : {std::pair{c.lemma_instances, "lemmas.instances"},
                         {c.lemma_action_instances, "lemmas.action_instances"},
                         {c.lemma_necessity_pairs, "lemmas.necessity_pairs"},
                         {c.semigroup_n0, "lemmas.semigroup_n0"}})
    if (v < 1) config_error(name, "must be >= 1");
  if (c.semigroup_levels < 2) config_error("lemmas.semigroup_levels", "must be >= 2");
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  const fs::path p(path);
  const std::string dir = p.has_parent_path() ? p.parent_path().string() : ".";
  return parse_config(read_json(path), dir);
}

Json config_json(const ScenarioConfig& c) {
  Json intervals = Json::array();
  for (const auto& [s, r] : c.intervals) intervals.push_back({s, r});
  Json params = Json::object();
  for (const auto& [k, v] : c.params) params[k] = v;
  return {{"model", {{"preset", c.preset}, {"params", params}}},
          {"grid", {{"n", c.lattice_n}, {"steps", c.steps}, {"t0", c.t0}, {"T", c.T}}},
          {"particles", c.particles},
          {"initial", {{"kind", c.initial}, {"path", c.initial_path}}},
          {"tolerances", tolerances_json(c)},
          {"seed", c.seed},
          {"threads", c.threads},
          {"out", c.out},
          {"solution", c.solution},
          {"intervals", intervals},
          {"derivative", {{"points", c.points}, {"fault", c.fault}, {"c", c.c}}},
          {"chain", {{"N", c.chain_N}}},
          {"lemmas",
           {{"instances", c.lemma_instances},
            {"action_instances", c.lemma_action_instances},
            {"necessity_pairs", c.lemma_necessity_pairs},
            {"semigroup_n0", c.semigroup_n0},
            {"semigroup_levels", c.semigroup_levels},
            {"chains", c.lemma_chains}}},
          {"w1", {{"a", c.w1_a}, {"b", c.w1_b}}}};
}

std::string config_hash(const ScenarioConfig& cfg) {
  Json j = config_json(cfg);
  j.erase("out");
  j.erase("threads");
  return fnv1a_hex(j.dump());
}

std::vector<std::string> subcommands() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : dispatch()) out.push_back(name);
  return out;
}

// -- entry points -------------------------------------------------------------------

RunResult run_scenario(const std::string& subcommand, const ScenarioConfig& cfg) {
  RunResult res;
  const auto& table = dispatch();
  const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == subcommand; });
  if (it == table.end()) {
    res.exit_code = 2;
    res.error = "unknown subcommand '" + subcommand + "'";
    return res;
  }
  Context ctx{cfg, {}, fs::path(cfg.out), {}, Json::object(), Json::object()};
  try {
    fs::create_directories(ctx.out);
  } catch (const std::exception& e) {
    res.exit_code = 2;
    res.error = std::string("cannot create output directory: ") + e.what();
    return res;
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    if (cfg.threads > 0) set_thread_count(cfg.threads);
    ctx.model = make_model(cfg.preset, cfg.params);
    it->second(ctx);
  } catch (const std::exception& e) {
    res.error = e.what();
    ctx.report.add(check_le("error", kInf, 0.0));
  }
  ctx.timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json report = {{"config_hash", config_hash(cfg)},
                 {"subcommand", subcommand},
                 {"pass", ctx.report.pass()},
                 {"checks", to_json(ctx.report)},
                 {"timings", ctx.timings},
                 {"tolerances", tolerances_json(cfg)},
                 {"config", config_json(cfg)},
                 {"results", ctx.results},
                 {"timestamp", utc_timestamp()}};
  if (!res.error.empty()) report["error"] = res.error;
  try {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : ctx.report.checks)
      rows.push_back({c.name, fmt(c.residual), fmt(c.bound), c.lower ? "ge" : "le", c.pass ? "1" : "0"});
    write_csv(ctx.out / "checks.csv", {"name", "residual", "bound", "kind", "pass"}, rows);
    write_json((ctx.out / "report.json").string(), report);
  } catch (const std::exception& e) {
    if (res.error.empty()) res.error = e.what();
    ctx.report.add(check_le("error", kInf, 0.0));
  }
  res.report = ctx.report;
  res.results = ctx.results;
  res.exit_code = ctx.report.pass() ? 0 : 1;
  return res;
}

RunResult run_from_file(const std::string& subcommand, const std::string& config_path, const Json& overrides) {
  ScenarioConfig cfg;
  try {
    Json j = read_json(config_path);
    if (!overrides.is_null()) j.merge_patch(overrides);
    const fs::path p(config_path);
    cfg = parse_config(j, p.has_parent_path() ? p.parent_path().string() : ".");
  } catch (const std::exception& e) {
    RunResult res;
    res.exit_code = 2;
    res.error = e.what();
    return res;
  }
  return run_scenario(subcommand, cfg);
}

}  // namespace mfgv
