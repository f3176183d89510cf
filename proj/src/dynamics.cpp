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

#include "mfgv/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfgv/error.hpp"
#include "mfgv/parallel.hpp"
#include "mfgv/wasserstein.hpp"

namespace mfgv {
namespace {

Eigen::VectorXd as_vec(const Velocity& v, int dim) {
  Eigen::VectorXd e(dim + 1);
  for (int i = 0; i < dim; ++i) e(i) = v.a[static_cast<std::size_t>(i)];
  e(dim) = v.b;
  return e;
}

std::vector<Stats> stats_on_grid(const ModelSpec& model, const Flow& flow,
                                 const std::vector<double>& times) {
  std::vector<Stats> out(times.size());
  // Nearest-slice lookups repeat when grids coincide; cache by index.
  std::vector<std::size_t> idx(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) idx[k] = flow.index_at(times[k]);
  std::vector<int> have(flow.size(), -1);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (have[idx[k]] < 0) {
      out[k] = model.summarize(flow.projected(idx[k]));
      have[idx[k]] = static_cast<int>(k);
    } else {
      out[k] = out[static_cast<std::size_t>(have[idx[k]])];
    }
  }
  return out;
}

Trajectory integrate(const ModelSpec& model, const std::vector<double>& times,
                     const std::vector<Stats>& stats, const ExtendedPoint& start,
                     const std::function<std::vector<double>(std::size_t, double,
                                                             const TorusPoint&,
                                                             const Stats&)>& weights_at) {
  Trajectory tr;
  tr.reserve(times.size());
  tr.push_back(start);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const ExtendedPoint& w = tr.back();
    const double dt = times[k + 1] - times[k];
    const auto ext = control_extremes(model, times[k], w.x, stats[k]);
    const std::vector<double> lam = weights_at(k, times[k], w.x, stats[k]);
    if (lam.size() != ext.size()) {
      throw InvalidArgument("relaxed control has wrong number of weights");
    }
    const Velocity v = mix(ext, lam);
    tr.push_back({translate(w.x, v.a, dt), w.z + dt * v.b});
  }
  return tr;
}

}  // namespace

void RelaxedControl::validate(std::size_t K) const {
  for (const auto& w : weights) {
    if (w.size() != K) throw InvalidArgument("RelaxedControl: wrong weight count");
    double s = 0.0;
    for (double x : w) {
      if (!(x >= 0.0)) throw InvalidArgument("RelaxedControl: negative weight");
      s += x;
    }
    if (std::fabs(s - 1.0) > 1e-12) throw InvalidArgument("RelaxedControl: weights must sum to 1");
  }
}

std::vector<Candidate> vectogram(const ModelSpec& model, double t, const TorusPoint& x,
                                 const Stats& m, int mesh) {
  const auto ext = control_extremes(model, t, x, m);
  std::vector<Candidate> out;
  for (auto& w : mixture_mesh(ext.size(), mesh)) {
    out.push_back({mix(ext, w), std::move(w)});
  }
  return out;
}

std::vector<Candidate> vectogram(const ModelSpec& model, double t, const TorusPoint& x,
                                 const DiscreteMeasure& m, int mesh) {
  return vectogram(model, t, x, model.summarize(m), mesh);
}

double dist_to_hull(const Velocity& v, const std::vector<Velocity>& pts_in, int dim) {
  if (pts_in.empty()) throw InvalidArgument("dist_to_hull: empty point set");
  const int D = dim + 1;
  std::vector<Eigen::VectorXd> pts;
  for (const auto& p : pts_in) {
    Eigen::VectorXd e = as_vec(p, dim);
    bool dup = false;
    for (const auto& q : pts) dup = dup || (q - e).norm() < 1e-14;
    if (!dup) pts.push_back(std::move(e));
  }
  const Eigen::VectorXd target = as_vec(v, dim);
  const int K = static_cast<int>(pts.size());
  if (K > 20) throw InvalidArgument("dist_to_hull: too many extremes");
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << K); ++mask) {
    const int k = __builtin_popcount(mask);
    if (k > D + 1) continue;
    std::vector<int> idx;
    for (int i = 0; i < K; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    const Eigen::VectorXd& p0 = pts[static_cast<std::size_t>(idx[0])];
    if (k == 1) {
      best = std::min(best, (target - p0).norm());
      continue;
    }
    Eigen::MatrixXd A(D, k - 1);
    for (int j = 1; j < k; ++j) A.col(j - 1) = pts[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] - p0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-12);
    if (qr.rank() < k - 1) continue;  // affinely dependent: a subset covers it
    const Eigen::VectorXd mu = qr.solve(target - p0);
    const double lam0 = 1.0 - mu.sum();
    if (lam0 < -1e-12 || (mu.array() < -1e-12).any()) continue;
    best = std::min(best, (p0 + A * mu - target).norm());
  }
  return best;
}

double dist_to_vectogram(const ModelSpec& model, const Velocity& v, double t,
                         const TorusPoint& x, const Stats& m) {
  return dist_to_hull(v, control_extremes(model, t, x, m), model.dim);
}

std::vector<Candidate> step_candidates(const std::vector<Velocity>& ext,
                                       const std::vector<std::vector<double>>& mesh,
                                       const TorusPoint& x, double tau, int lattice_n) {
  std::vector<Candidate> out;
  out.reserve(mesh.size() + 8);
  for (const auto& w : mesh) out.push_back({mix(ext, w), w});
  if (lattice_n <= 0 || x.dim != 1 || !(tau > 0.0) || ext.size() < 2) return out;
  // Upper hull of the extremes in the (a, b) plane, left to right.
  std::vector<std::size_t> order(ext.size());
  for (std::size_t k = 0; k < ext.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (ext[i].a[0] != ext[j].a[0]) return ext[i].a[0] < ext[j].a[0];
    if (ext[i].b != ext[j].b) return ext[i].b > ext[j].b;
    return i < j;
  });
  std::vector<std::size_t> hull;
  for (std::size_t k : order) {
    if (!hull.empty() && ext[hull.back()].a[0] == ext[k].a[0]) continue;
    while (hull.size() >= 2) {
      const auto& p = ext[hull[hull.size() - 2]];
      const auto& q = ext[hull.back()];
      const auto& r = ext[k];
      const double cross = (q.a[0] - p.a[0]) * (r.b - p.b) - (q.b - p.b) * (r.a[0] - p.a[0]);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(k);
  }
  const double n = lattice_n;
  for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
    const std::size_t ip = hull[e], iq = hull[e + 1];
    const double ap = ext[ip].a[0], aq = ext[iq].a[0];
    const double lo = (x[0] + tau * ap) * n, hi = (x[0] + tau * aq) * n;
    const long j0 = static_cast<long>(std::floor(lo + 1e-9)) + 1;
    const long j1 = static_cast<long>(std::ceil(hi - 1e-9)) - 1;
    for (long j = j0; j <= j1; ++j) {
      const double a = (static_cast<double>(j) / n - x[0]) / tau;
      const double lam = (aq - a) / (aq - ap);
      std::vector<double> w(ext.size(), 0.0);
      w[ip] = lam;
      w[iq] = 1.0 - lam;
      Velocity v;
      v.a[0] = a;
      v.b = lam * ext[ip].b + (1.0 - lam) * ext[iq].b;
      out.push_back({v, std::move(w)});
    }
  }
  return out;
}

Trajectory relaxed_trajectory(const ModelSpec& model, double s, double r,
                              const TorusPoint& y, const Flow& flow,
                              const RelaxedControl& xi, int steps, double z0) {
  flow.require_covers(s, r);
  const auto times = uniform_times(s, r, steps);
  if (xi.weights.size() + 1 < times.size()) {
    throw InvalidArgument("relaxed_trajectory: control shorter than the grid");
  }
  xi.validate(model.num_controls());
  const auto stats = stats_on_grid(model, flow, times);
  return integrate(model, times, stats, {y, z0},
                   [&](std::size_t k, double, const TorusPoint&, const Stats&) {
                     return xi.weights[k];
                   });
}

namespace {

bool same_atoms(const ExtendedMeasure& a, const ExtendedMeasure& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (atom_key(a.atoms[i].point) != atom_key(b.atoms[i].point) ||
        std::fabs(a.atoms[i].weight - b.atoms[i].weight) > kMassTol) {
      return false;
    }
  }
  return true;
}

}  // namespace

double path_flow_mismatch(const PathMeasure& chi, const Flow& flow) {
  if (chi.times.size() != flow.size()) throw InvalidArgument("path_flow_mismatch: grids differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < flow.size(); ++k) {
    const ExtendedMeasure slice = evaluate_index(chi, k);
    if (!same_atoms(slice, flow.extended(k))) {
      worst = std::max(worst, w1(slice, flow.extended(k)).distance);
    }
  }
  return worst;
}

double flow_distance(const Flow& a, const Flow& b) {
  if (a.size() != b.size()) throw InvalidArgument("flow_distance: grids differ");
  double best = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    best = std::max(best, w1_distance(a.projected(k), b.projected(k)));
  }
  return best;
}

namespace {

struct Sweep {
  PathMeasure chi;
  Flow flow;
};

Sweep sweep_once(const ModelSpec& model, const std::vector<double>& times,
                 const ExtendedMeasure& nu0, const SelectionPolicy& policy,
                 std::size_t step_offset, const std::vector<Stats>& stats) {
  Sweep out;
  out.chi.times = times;
  out.chi.atoms.resize(nu0.size());
  parallel_for(nu0.size(), [&](std::size_t i) {
    const auto& a = nu0.atoms[i];
    out.chi.atoms[i] = {
        integrate(model, times, stats, a.point,
                  [&](std::size_t k, double t, const TorusPoint& x, const Stats& m) {
                    return policy(i, k + step_offset, t, x, m);
                  }),
        a.weight};
  });
  out.flow = Flow::from_paths(out.chi);
  return out;
}

MfdiResult solve_interval(const ModelSpec& model, double s, double r,
                          const ExtendedMeasure& nu0, const SelectionPolicy& policy,
                          const MfdiOptions& opt, int steps, std::size_t offset,
                          int splits_left) {
  const auto times = uniform_times(s, r, steps);
  Flow guess;
  if (opt.seed != nullptr) {
    std::vector<ExtendedMeasure> sl;
    for (double t : times) sl.push_back(opt.seed->extended(opt.seed->index_at(t)));
    guess = Flow(times, std::move(sl));
  } else {
    guess = Flow::constant(times, nu0);
  }
  MfdiResult res;
  double prev = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Sweep sw = sweep_once(model, times, nu0, policy, offset, summarize_flow(model, guess));
    const double resid = flow_distance(sw.flow, guess);
    res.history.push_back(resid);
    res.chi = std::move(sw.chi);
    res.flow = std::move(sw.flow);
    res.residual = resid;
    if (resid < opt.tol) {
      res.iterations = std::max(1, it - 1);
      return res;
    }
    stalled = (resid > 0.9 * prev) ? stalled + 1 : 0;
    prev = resid;
    guess = res.flow;
    if (stalled >= 3 && splits_left > 0 && steps % 2 == 0 && steps >= 2) {
      const double mid = times[static_cast<std::size_t>(steps / 2)];
      MfdiResult a = solve_interval(model, s, mid, nu0, policy, opt, steps / 2, offset,
                                    splits_left - 1);
      MfdiResult b = solve_interval(model, mid, r, a.flow.extended(a.flow.size() - 1), policy,
                                    opt, steps / 2,
                                    offset + static_cast<std::size_t>(steps / 2),
                                    splits_left - 1);
      // Both halves carry one path per atom in nu0 order, so gluing is a
      // per-index splice rather than a general concatenation.
      MfdiResult glued;
      glued.chi.times = a.chi.times;
      glued.chi.times.insert(glued.chi.times.end(), b.chi.times.begin() + 1, b.chi.times.end());
      for (std::size_t i = 0; i < a.chi.atoms.size(); ++i) {
        Trajectory tr = a.chi.atoms[i].point;
        tr.insert(tr.end(), b.chi.atoms[i].point.begin() + 1, b.chi.atoms[i].point.end());
        glued.chi.atoms.push_back({std::move(tr), a.chi.atoms[i].weight});
      }
      glued.flow = Flow::from_paths(glued.chi);
      glued.iterations = it + a.iterations + b.iterations;
      glued.residual = std::max(a.residual, b.residual);
      glued.history = res.history;
      glued.history.insert(glued.history.end(), a.history.begin(), a.history.end());
      glued.history.insert(glued.history.end(), b.history.begin(), b.history.end());
      glued.splits = 1 + a.splits + b.splits;
      return glued;
    }
  }
  throw ConvergenceFailure("mfdi_solve: no fixed point after " +
                               std::to_string(opt.max_iter) + " iterations",
                           res.residual);
}

}  // namespace

MfdiResult mfdi_solve(const ModelSpec& model, double s, double r,
                      const ExtendedMeasure& nu0, const SelectionPolicy& policy,
                      const MfdiOptions& options) {
  validate(nu0);
  if (!(r > s)) throw InvalidArgument("mfdi_solve: need s < r");
  if (options.steps < 1 || options.max_iter < 1 || !(options.tol > 0.0)) {
    throw InvalidArgument("mfdi_solve: bad options");
  }
  return solve_interval(model, s, r, nu0, policy, options, options.steps, 0,
                        options.max_splits);
}

double verify_sol(const ModelSpec& model, const Trajectory& path,
                  const std::vector<double>& times, const std::vector<Stats>& stats) {
  if (path.size() != times.size() || stats.size() != times.size()) {
    throw InvalidArgument("verify_sol: path, grid and flow differ in length");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double dt = times[k + 1] - times[k];
    const Coords dx = displacement(path[k].x, path[k + 1].x);
    Velocity v;
    for (int i = 0; i < model.dim; ++i) v.a[static_cast<std::size_t>(i)] = dx[static_cast<std::size_t>(i)] / dt;
    v.b = (path[k + 1].z - path[k].z) / dt;
    worst = std::max(worst, dist_to_vectogram(model, v, times[k], path[k].x, stats[k]));
  }
  return worst;
}

double verify_sol(const ModelSpec& model, const Trajectory& path,
                  const std::vector<double>& times, const Flow& flow) {
  return verify_sol(model, path, times, stats_on_grid(model, flow, times));
}

double verify_paths(const ModelSpec& model, const PathMeasure& chi, const Flow& flow) {
  const auto stats = stats_on_grid(model, flow, chi.times);
  std::vector<double> r(chi.size(), 0.0);
  parallel_for(chi.size(), [&](std::size_t i) {
    r[i] = verify_sol(model, chi.atoms[i].point, chi.times, stats);
  });
  return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

double max_speed(const PathMeasure& chi) {
  double best = 0.0;
  for (const auto& a : chi.atoms) {
    for (std::size_t k = 0; k + 1 < chi.times.size(); ++k) {
      const double dt = chi.times[k + 1] - chi.times[k];
      const Coords dx = displacement(a.point[k].x, a.point[k + 1].x);
      best = std::max({best, norm(dx, a.point[k].x.dim) / dt,
                       std::fabs(a.point[k + 1].z - a.point[k].z) / dt});
    }
  }
  return best;
}

GluedPaths concat_flows(const ModelSpec& model, const PathMeasure& chi1,
                        const PathMeasure& chi2) {
  GluedPaths out;
  out.chi = concat_path_measures(chi1, chi2);
  out.residual = verify_paths(model, out.chi, Flow::from_paths(out.chi));
  return out;
}

}  // namespace mfgv
