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

#include "mfgv/wasserstein.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <utility>

#include "mfgv/error.hpp"

namespace mfgv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZero = 1e-15;

template <class P, class Cost>
TransportResult<P> transport(const Measure<P>& m1, const Measure<P>& m2,
                             Cost cost_fn) {
  const std::size_t n = m1.size(), m = m2.size();
  std::vector<double> a(n), b(m), c(n * m);
  for (std::size_t i = 0; i < n; ++i) a[i] = m1.atoms[i].weight;
  for (std::size_t j = 0; j < m; ++j) b[j] = m2.atoms[j].weight;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      c[i * m + j] = cost_fn(m1.atoms[i].point, m2.atoms[j].point);
    }
  }
  TransportResult<P> res;
  const std::vector<double> flow = solve_transport(a, b, c, &res.distance);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double f = flow[i * m + j];
      if (f > 0.0) res.plan.atoms.push_back({m1.atoms[i].point, m2.atoms[j].point, f});
    }
  }
  return res;
}

}  // namespace

std::vector<double> solve_transport(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    const std::vector<double>& cost,
                                    double* total_cost) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0 || cost.size() != n * m) {
    throw InvalidArgument("solve_transport: inconsistent sizes");
  }
  // Node layout: 0 = source, 1..n rows, n+1..n+m columns, n+m+1 = sink.
  const std::size_t V = n + m + 2, S = 0, T = n + m + 1;
  auto row = [](std::size_t i) { return 1 + i; };
  auto col = [n](std::size_t j) { return 1 + n + j; };

  std::vector<double> flow(n * m, 0.0), supply = a, demand = b;
  std::vector<double> used(n, 0.0), recv(m, 0.0);
  std::vector<double> pot(V, 0.0), dist(V);
  std::vector<std::size_t> prev(V);
  std::vector<char> done(V);

  double remaining = std::accumulate(a.begin(), a.end(), 0.0);
  const double target = std::min(remaining, std::accumulate(b.begin(), b.end(), 0.0));
  double shipped = 0.0;
  for (int guard = 0; shipped < target - kZero && guard < static_cast<int>(4 * (n + m) + 16);
       ++guard) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    dist[S] = 0.0;
    for (;;) {
      std::size_t u = V;
      double best = kInf;
      for (std::size_t v = 0; v < V; ++v) {
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      }
      if (u == V) break;
      done[u] = 1;
      if (u == T) break;
      auto relax = [&](std::size_t v, double c) {
        const double rc = std::max(0.0, c + pot[u] - pot[v]);
        if (dist[u] + rc < dist[v]) {
          dist[v] = dist[u] + rc;
          prev[v] = u;
        }
      };
      if (u == S) {
        for (std::size_t i = 0; i < n; ++i) {
          if (supply[i] > kZero) relax(row(i), 0.0);
        }
      } else if (u <= n) {
        const std::size_t i = u - 1;
        for (std::size_t j = 0; j < m; ++j) relax(col(j), cost[i * m + j]);
        if (used[i] > kZero) relax(S, 0.0);
      } else if (u < T) {
        const std::size_t j = u - 1 - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (flow[i * m + j] > kZero) relax(row(i), -cost[i * m + j]);
        }
        if (demand[j] > kZero) relax(T, 0.0);
      } else {
        for (std::size_t j = 0; j < m; ++j) {
          if (recv[j] > kZero) relax(col(j), 0.0);
        }
      }
    }
    if (dist[T] == kInf) break;
    // Bottleneck along the path.
    double delta = kInf;
    for (std::size_t v = T; v != S; v = prev[v]) {
      const std::size_t u = prev[v];
      if (u == S) {
        delta = std::min(delta, supply[v - 1]);
      } else if (v == T) {
        delta = std::min(delta, demand[u - 1 - n]);
      } else if (u <= n && v > n) {
        // forward arc, unbounded
      } else if (u > n && v <= n && v >= 1) {
        delta = std::min(delta, flow[(v - 1) * m + (u - 1 - n)]);
      } else if (v == S) {
        delta = std::min(delta, used[u - 1]);
      }
    }
    delta = std::min(delta, target - shipped);
    for (std::size_t v = T; v != S; v = prev[v]) {
      const std::size_t u = prev[v];
      if (u == S) {
        supply[v - 1] -= delta;
        used[v - 1] += delta;
      } else if (v == T) {
        demand[u - 1 - n] -= delta;
        recv[u - 1 - n] += delta;
      } else if (u >= 1 && u <= n && v > n) {
        flow[(u - 1) * m + (v - 1 - n)] += delta;
      } else if (u > n && v >= 1 && v <= n) {
        double& f = flow[(v - 1) * m + (u - 1 - n)];
        f -= delta;
        if (f < kZero) f = 0.0;
      }
    }
    shipped += delta;
    const double dT = dist[T];
    for (std::size_t v = 0; v < V; ++v) pot[v] += std::min(dist[v], dT);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < flow.size(); ++k) total += flow[k] * cost[k];
  if (total_cost) *total_cost = total;
  return flow;
}

double extended_dist(const ExtendedPoint& p, const ExtendedPoint& q) {
  return torus_dist(p.x, q.x) + std::fabs(p.z - q.z);
}

double path_sup_dist(const Trajectory& p, const Trajectory& q) {
  if (p.size() != q.size()) throw InvalidArgument("path_sup_dist: grid mismatch");
  double best = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) best = std::max(best, extended_dist(p[k], q[k]));
  return best;
}

TransportResult<TorusPoint> w1(const DiscreteMeasure& m1, const DiscreteMeasure& m2,
                               Ground ground) {
  if (ground != Ground::kTorus) throw InvalidArgument("w1: ground must be torus");
  if (measure_dim(m1) != measure_dim(m2)) throw InvalidArgument("w1: dimension mismatch");
  return transport(m1, m2, [](const TorusPoint& x, const TorusPoint& y) {
    return torus_dist(x, y);
  });
}

TransportResult<ExtendedPoint> w1(const ExtendedMeasure& m1, const ExtendedMeasure& m2,
                                  Ground ground) {
  if (ground != Ground::kExtended) throw InvalidArgument("w1: ground must be extended");
  if (measure_dim(m1) != measure_dim(m2)) throw InvalidArgument("w1: dimension mismatch");
  return transport(m1, m2, extended_dist);
}

TransportResult<Trajectory> w1(const PathMeasure& c1, const PathMeasure& c2,
                               Ground ground) {
  if (ground != Ground::kPathSup) throw InvalidArgument("w1: ground must be path sup");
  if (c1.times.size() != c2.times.size()) throw InvalidArgument("w1: time grids differ");
  for (std::size_t k = 0; k < c1.times.size(); ++k) {
    if (std::fabs(c1.times[k] - c2.times[k]) > 1e-12) {
      throw InvalidArgument("w1: time grids differ");
    }
  }
  Measure<Trajectory> a, b;
  a.atoms = c1.atoms;
  b.atoms = c2.atoms;
  return transport(a, b, path_sup_dist);
}

double w1_circle(const DiscreteMeasure& m1, const DiscreteMeasure& m2) {
  if (measure_dim(m1) != 1 || measure_dim(m2) != 1) {
    throw InvalidArgument("w1_circle: measures must live on T^1");
  }
  std::vector<std::pair<double, double>> ev;
  ev.reserve(m1.size() + m2.size());
  for (const auto& a : m1.atoms) ev.emplace_back(a.point[0], a.weight);
  for (const auto& a : m2.atoms) ev.emplace_back(a.point[0], -a.weight);
  std::sort(ev.begin(), ev.end());
  // Piecewise-constant F - G with segment lengths.
  std::vector<std::pair<double, double>> seg;  // (value, length)
  seg.reserve(ev.size() + 1);
  double cur = 0.0, last = 0.0;
  for (const auto& [x, w] : ev) {
    if (x > last) seg.emplace_back(cur, x - last);
    cur += w;
    last = x;
  }
  if (last < 1.0) seg.emplace_back(cur, 1.0 - last);
  // Weighted median of the values under Lebesgue weights.
  std::vector<std::pair<double, double>> sorted = seg;
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0, med = sorted.empty() ? 0.0 : sorted.front().first;
  for (const auto& [v, len] : sorted) {
    acc += len;
    med = v;
    if (acc >= 0.5) break;
  }
  double total = 0.0;
  for (const auto& [v, len] : seg) total += len * std::fabs(v - med);
  return total;
}

double w1_distance(const DiscreteMeasure& m1, const DiscreteMeasure& m2) {
  if (measure_dim(m1) != measure_dim(m2)) {
    throw InvalidArgument("w1_distance: dimension mismatch");
  }
  if (measure_dim(m1) == 1) return w1_circle(m1, m2);
  return w1(m1, m2).distance;
}

double w1_dual_lower_bound(const DiscreteMeasure& m1, const DiscreteMeasure& m2,
                           const GridFunction& phi) {
  if (phi.lipschitz() > 1.0 + 1e-9) {
    throw PreconditionViolation("w1_dual_lower_bound: test function is not 1-Lipschitz");
  }
  return action(phi, lift(m1)) - action(phi, lift(m2));
}

}  // namespace mfgv
