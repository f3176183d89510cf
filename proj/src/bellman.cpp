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

#include "mfgv/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfgv/error.hpp"
#include "mfgv/parallel.hpp"

namespace mfgv {
namespace {

struct Best {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t index = 0;
};

Best best_candidate(const std::vector<Candidate>& cands, const GridFunction& next,
                    const TorusPoint& x, double tau) {
  Best b;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    const double v = next(translate(x, cands[c].v.a, tau)) + tau * cands[c].v.b;
    if (v > b.value) {
      b.value = v;
      b.index = c;
    }
  }
  return b;
}

int crossing_lattice(const GridFunction& phi) { return phi.dim() == 1 ? phi.n() : 0; }

GridFunction one_step(const ModelSpec& model, double t, double tau, const Stats& m,
                      const GridFunction& next,
                      const std::vector<std::vector<double>>& mesh) {
  const TorusLattice& lat = next.lattice();
  std::vector<double> out(lat.size());
  parallel_for(lat.size(), [&](std::size_t i) {
    const TorusPoint x = lat.node(i);
    const auto cands = step_candidates(control_extremes(model, t, x, m), mesh, x, tau,
                                       crossing_lattice(next));
    out[i] = best_candidate(cands, next, x, tau).value;
  });
  return GridFunction(lat, std::move(out));
}

}  // namespace

BellmanResult bellman_B(const ModelSpec& model, const std::vector<double>& times,
                        const std::vector<Stats>& stats, const GridFunction& psi) {
  if (times.empty() || stats.size() != times.size()) {
    throw InvalidArgument("bellman_B: grid and summaries differ in length");
  }
  if (psi.dim() != model.dim) throw InvalidArgument("bellman_B: dimension mismatch");
  const auto mesh = mixture_mesh(model.num_controls(), model.mesh);
  BellmanResult res;
  res.times = times;
  res.values.assign(times.size(), psi);
  for (std::size_t k = times.size() - 1; k-- > 0;) {
    res.values[k] = one_step(model, times[k], times[k + 1] - times[k], stats[k],
                             res.values[k + 1], mesh);
  }
  return res;
}

BellmanResult bellman_B(const ModelSpec& model, double s, double r, const Flow& flow,
                        const GridFunction& psi, int steps) {
  if (steps < 1) throw InvalidArgument("bellman_B: steps must be >= 1");
  flow.require_covers(s, r);
  const auto times = uniform_times(s, r, steps);
  std::vector<Stats> stats(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) stats[k] = model.summarize(flow.at(times[k]));
  return bellman_B(model, times, stats, psi);
}

GridFunction frozen_A(const ModelSpec& model, double s, double r, const Stats& m,
                      const GridFunction& phi) {
  if (r < s) throw InvalidArgument("frozen_A: need s <= r");
  if (r == s) return phi;
  return one_step(model, s, r - s, m, phi, mixture_mesh(model.num_controls(), model.mesh));
}

GridFunction frozen_A(const ModelSpec& model, double s, double r, const DiscreteMeasure& m,
                      const GridFunction& phi) {
  return frozen_A(model, s, r, model.summarize(m), phi);
}

Selection optimal_selection(const ModelSpec& model, const BellmanResult& sweep,
                            const std::vector<Stats>& stats, const TorusPoint& y,
                            double z0) {
  const auto& times = sweep.times;
  if (stats.size() != times.size()) throw InvalidArgument("optimal_selection: bad summaries");
  const auto mesh = mixture_mesh(model.num_controls(), model.mesh);
  Selection sel;
  sel.path.push_back({y, z0});
  const double v0 = sweep.values.front()(y);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const ExtendedPoint w = sel.path.back();
    const double tau = times[k + 1] - times[k];
    const GridFunction& next = sweep.values[k + 1];
    const auto cands = step_candidates(control_extremes(model, times[k], w.x, stats[k]), mesh,
                                       w.x, tau, crossing_lattice(next));
    const Best b = best_candidate(cands, next, w.x, tau);
    const Candidate& c = cands[b.index];
    sel.control.weights.push_back(c.weights);
    sel.path.push_back({translate(w.x, c.v.a, tau), w.z + tau * c.v.b});
    const ExtendedPoint& nw = sel.path.back();
    sel.conservation =
        std::max(sel.conservation, std::fabs(next(nw.x) + nw.z - v0 - z0));
  }
  const ExtendedPoint& end = sel.path.back();
  sel.payoff = sweep.values.back()(end.x) + end.z - z0;
  sel.value_gap = v0 - sel.payoff;
  return sel;
}

Selection optimal_selection(const ModelSpec& model, const BellmanResult& sweep,
                            const Flow& flow, const TorusPoint& y, double z0) {
  std::vector<Stats> stats(sweep.times.size());
  for (std::size_t k = 0; k < stats.size(); ++k) {
    stats[k] = model.summarize(flow.at(sweep.times[k]));
  }
  return optimal_selection(model, sweep, stats, y, z0);
}

}  // namespace mfgv
