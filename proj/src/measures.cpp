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

#include "mfgv/measures.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace mfgv {
namespace {

constexpr double kKeyScale = 1.0 / kMatchTol;
constexpr std::int64_t kKeyPeriod = 1000000000;  // one torus period in keys

std::int64_t torus_key(double v) {
  std::int64_t k = std::llround(v * kKeyScale);
  k %= kKeyPeriod;
  if (k < 0) k += kKeyPeriod;
  return k;
}

std::int64_t real_key(double v) { return std::llround(v * kKeyScale); }

template <class P>
double mass_of(const Measure<P>& m) {
  double s = 0.0;
  for (const auto& a : m.atoms) s += a.weight;
  return s;
}

void check_weights(const std::vector<double>& w, const char* what) {
  if (w.empty()) throw InvalidArgument(std::string(what) + ": no atoms");
  double s = 0.0;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) {
      throw InvalidArgument(std::string(what) + ": negative or non-finite weight");
    }
    s += x;
  }
  if (std::fabs(s - 1.0) > kMassTol * std::max<double>(1.0, w.size() * 1e-2)) {
    throw InvalidArgument(std::string(what) + ": weights sum to " +
                          std::to_string(s));
  }
}

void check_point(const TorusPoint& p, int dim, const char* what) {
  if (p.dim != dim) throw InvalidArgument(std::string(what) + ": mixed dimensions");
  for (int i = 0; i < p.dim; ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0 || p[i] >= 1.0) {
      throw InvalidArgument(std::string(what) + ": coordinate outside [0,1)");
    }
  }
}

AtomKey trajectory_key_part(const ExtendedPoint& p) { return atom_key(p); }

}  // namespace

AtomKey atom_key(const TorusPoint& p) {
  AtomKey k{};
  k[0] = p.dim;
  for (int i = 0; i < p.dim; ++i) k[static_cast<std::size_t>(1 + i)] = torus_key(p[i]);
  return k;
}

AtomKey atom_key(const ExtendedPoint& p) {
  AtomKey k = atom_key(p.x);
  k[3] = real_key(p.z);
  k[4] = 1;
  return k;
}

AtomKey atom_key(const Velocity& v) {
  AtomKey k{};
  k[0] = -1;
  k[1] = real_key(v.a[0]);
  k[2] = real_key(v.a[1]);
  k[3] = real_key(v.b);
  return k;
}

double total_mass(const DiscreteMeasure& m) { return mass_of(m); }
double total_mass(const ExtendedMeasure& m) { return mass_of(m); }

void validate(const DiscreteMeasure& m) {
  std::vector<double> w;
  w.reserve(m.size());
  for (const auto& a : m.atoms) w.push_back(a.weight);
  check_weights(w, "DiscreteMeasure");
  const int d = m.atoms.front().point.dim;
  if (d < 1 || d > kMaxDim) throw InvalidArgument("DiscreteMeasure: bad dimension");
  for (const auto& a : m.atoms) check_point(a.point, d, "DiscreteMeasure");
}

void validate(const ExtendedMeasure& m) {
  std::vector<double> w;
  w.reserve(m.size());
  for (const auto& a : m.atoms) w.push_back(a.weight);
  check_weights(w, "ExtendedMeasure");
  const int d = m.atoms.front().point.x.dim;
  if (d < 1 || d > kMaxDim) throw InvalidArgument("ExtendedMeasure: bad dimension");
  for (const auto& a : m.atoms) {
    check_point(a.point.x, d, "ExtendedMeasure");
    if (!std::isfinite(a.point.z)) throw InvalidArgument("ExtendedMeasure: non-finite z");
  }
}

void validate(const PathMeasure& chi) {
  if (chi.times.empty()) throw InvalidArgument("PathMeasure: empty time grid");
  for (std::size_t k = 1; k < chi.times.size(); ++k) {
    if (!(chi.times[k] > chi.times[k - 1])) {
      throw InvalidArgument("PathMeasure: time grid not strictly increasing");
    }
  }
  std::vector<double> w;
  for (const auto& a : chi.atoms) {
    if (a.point.size() != chi.times.size()) {
      throw InvalidArgument("PathMeasure: trajectory length differs from grid");
    }
    w.push_back(a.weight);
  }
  check_weights(w, "PathMeasure");
  const int d = chi.atoms.front().point.front().x.dim;
  for (const auto& a : chi.atoms) {
    for (const auto& s : a.point) {
      check_point(s.x, d, "PathMeasure");
      if (!std::isfinite(s.z)) throw InvalidArgument("PathMeasure: non-finite z");
    }
  }
}

DiscreteMeasure dirac(const TorusPoint& x) {
  DiscreteMeasure m;
  m.atoms.push_back({x, 1.0});
  return m;
}

DiscreteMeasure uniform_measure(const std::vector<TorusPoint>& points) {
  if (points.empty()) throw InvalidArgument("uniform_measure: no points");
  DiscreteMeasure m;
  const double w = 1.0 / static_cast<double>(points.size());
  for (const auto& p : points) m.atoms.push_back({p, w});
  return m;
}

DiscreteMeasure project(const ExtendedMeasure& nu) {
  DiscreteMeasure m;
  m.atoms.reserve(nu.size());
  for (const auto& a : nu.atoms) m.atoms.push_back({a.point.x, a.weight});
  return m;
}

ExtendedMeasure lift(const DiscreteMeasure& m) {
  ExtendedMeasure nu;
  nu.atoms.reserve(m.size());
  for (const auto& a : m.atoms) nu.atoms.push_back({{a.point, 0.0}, a.weight});
  return nu;
}

double action(const GridFunction& phi, const ExtendedMeasure& nu) {
  double s = 0.0;
  for (const auto& a : nu.atoms) s += a.weight * (phi(a.point.x) + a.point.z);
  return s;
}

std::size_t nearest_time_index(const std::vector<double>& times, double t) {
  if (times.empty()) throw OutOfRange("empty time grid");
  const double eps = 1e-9;
  if (t < times.front() - eps || t > times.back() + eps) {
    throw OutOfRange("time " + std::to_string(t) + " outside [" +
                     std::to_string(times.front()) + ", " +
                     std::to_string(times.back()) + "]");
  }
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  // Ties resolve to the earlier grid time.
  return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

ExtendedMeasure evaluate_index(const PathMeasure& chi, std::size_t k) {
  ExtendedMeasure nu;
  nu.atoms.reserve(chi.size());
  for (const auto& a : chi.atoms) nu.atoms.push_back({a.point[k], a.weight});
  return nu;
}

ExtendedMeasure evaluate(const PathMeasure& chi, double t) {
  return evaluate_index(chi, nearest_time_index(chi.times, t));
}

PathMeasure concat_path_measures(const PathMeasure& chi1, const PathMeasure& chi2) {
  if (chi1.times.empty() || chi2.times.empty()) {
    throw InvalidArgument("concat_path_measures: empty time grid");
  }
  if (std::fabs(chi1.times.back() - chi2.times.front()) > 1e-9) {
    throw PreconditionViolation("concat_path_measures: time grids do not meet");
  }
  std::map<AtomKey, double> end1, start2;
  std::map<AtomKey, std::vector<std::size_t>> starts;
  for (const auto& a : chi1.atoms) end1[atom_key(a.point.back())] += a.weight;
  for (std::size_t j = 0; j < chi2.atoms.size(); ++j) {
    const AtomKey k = atom_key(chi2.atoms[j].point.front());
    start2[k] += chi2.atoms[j].weight;
    starts[k].push_back(j);
  }
  if (end1.size() != start2.size()) {
    throw PreconditionViolation("concat_path_measures: endpoint supports differ");
  }
  for (const auto& [k, w] : end1) {
    const auto it = start2.find(k);
    if (it == start2.end() || std::fabs(it->second - w) > kMatchTol) {
      throw PreconditionViolation("concat_path_measures: endpoint masses differ");
    }
  }
  PathMeasure out;
  out.times = chi1.times;
  out.times.insert(out.times.end(), chi2.times.begin() + 1, chi2.times.end());
  for (const auto& a : chi1.atoms) {
    const AtomKey k = atom_key(a.point.back());
    const double mass = start2[k];
    for (std::size_t j : starts[k]) {
      const auto& b = chi2.atoms[j];
      const double w = a.weight * b.weight / mass;
      if (!(w > 0.0)) continue;
      Trajectory tr = a.point;
      tr.insert(tr.end(), b.point.begin() + 1, b.point.end());
      out.atoms.push_back({std::move(tr), w});
    }
  }
  return out;
}

PathMeasure reanchor_flow(const PathMeasure& chi, const ExtendedMeasure& nu_star) {
  if (chi.atoms.empty()) throw InvalidArgument("reanchor_flow: empty path measure");
  // Group both sides by the x(s) fiber.
  std::map<AtomKey, std::vector<std::size_t>> paths, anchors;
  std::map<AtomKey, double> mass_p, mass_a;
  for (std::size_t i = 0; i < chi.atoms.size(); ++i) {
    const AtomKey k = atom_key(chi.atoms[i].point.front().x);
    paths[k].push_back(i);
    mass_p[k] += chi.atoms[i].weight;
  }
  for (std::size_t j = 0; j < nu_star.atoms.size(); ++j) {
    const AtomKey k = atom_key(nu_star.atoms[j].point.x);
    anchors[k].push_back(j);
    mass_a[k] += nu_star.atoms[j].weight;
  }
  if (mass_p.size() != mass_a.size()) {
    throw PreconditionViolation("reanchor_flow: x-marginals differ");
  }
  for (const auto& [k, w] : mass_p) {
    const auto it = mass_a.find(k);
    if (it == mass_a.end() || std::fabs(it->second - w) > kMatchTol) {
      throw PreconditionViolation("reanchor_flow: x-marginals differ");
    }
  }
  PathMeasure out;
  out.times = chi.times;
  for (auto& [k, idx] : paths) {
    auto& anc = anchors[k];
    auto by_z_paths = [&](std::size_t a, std::size_t b) {
      const double za = chi.atoms[a].point.front().z;
      const double zb = chi.atoms[b].point.front().z;
      return za < zb || (za == zb && a < b);
    };
    auto by_z_anchor = [&](std::size_t a, std::size_t b) {
      const double za = nu_star.atoms[a].point.z;
      const double zb = nu_star.atoms[b].point.z;
      return za < zb || (za == zb && a < b);
    };
    std::sort(idx.begin(), idx.end(), by_z_paths);
    std::sort(anc.begin(), anc.end(), by_z_anchor);
    // North-west corner rule on conditional masses -> monotone coupling.
    const double mp = mass_p[k];
    const double ma = mass_a[k];
    std::size_t i = 0, j = 0;
    double left_i = chi.atoms[idx[0]].weight / mp;
    double left_j = nu_star.atoms[anc[0]].weight / ma;
    while (i < idx.size() && j < anc.size()) {
      const double q = std::min(left_i, left_j);
      if (q > 0.0) {
        const auto& src = chi.atoms[idx[i]].point;
        const double shift = nu_star.atoms[anc[j]].point.z - src.front().z;
        Trajectory tr = src;
        for (auto& s : tr) s.z += shift;
        out.atoms.push_back({std::move(tr), q * mp});
      }
      left_i -= q;
      left_j -= q;
      const bool adv_i = left_i <= 1e-15;
      const bool adv_j = left_j <= 1e-15;
      if (adv_i && ++i < idx.size()) left_i = chi.atoms[idx[i]].weight / mp;
      if (adv_j && ++j < anc.size()) left_j = nu_star.atoms[anc[j]].weight / ma;
      if (!adv_i && !adv_j) break;
    }
  }
  return merge_identical_paths(out);
}

PathMeasure merge_identical_paths(const PathMeasure& chi) {
  PathMeasure out;
  out.times = chi.times;
  std::map<std::vector<AtomKey>, std::size_t> slot;
  for (const auto& a : chi.atoms) {
    std::vector<AtomKey> key;
    key.reserve(a.point.size());
    for (const auto& s : a.point) key.push_back(trajectory_key_part(s));
    const auto [it, fresh] = slot.emplace(std::move(key), out.atoms.size());
    if (fresh) {
      out.atoms.push_back(a);
    } else {
      out.atoms[it->second].weight += a.weight;
    }
  }
  return out;
}

Flow::Flow(std::vector<double> times, std::vector<ExtendedMeasure> slices)
    : times_(std::move(times)), slices_(std::move(slices)) {
  if (times_.empty() || times_.size() != slices_.size()) {
    throw InvalidArgument("Flow: times and slices differ in length");
  }
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) {
      throw InvalidArgument("Flow: time grid not strictly increasing");
    }
  }
  projected_.reserve(slices_.size());
  for (const auto& s : slices_) projected_.push_back(project(s));
}

Flow Flow::from_paths(const PathMeasure& chi) {
  std::vector<ExtendedMeasure> slices;
  slices.reserve(chi.times.size());
  for (std::size_t k = 0; k < chi.times.size(); ++k) {
    slices.push_back(evaluate_index(chi, k));
  }
  return Flow(chi.times, std::move(slices));
}

Flow Flow::constant(const std::vector<double>& times, const ExtendedMeasure& nu) {
  return Flow(times, std::vector<ExtendedMeasure>(times.size(), nu));
}

Flow Flow::from_projected(std::vector<double> times,
                          const std::vector<DiscreteMeasure>& slices) {
  std::vector<ExtendedMeasure> ext;
  ext.reserve(slices.size());
  for (const auto& m : slices) ext.push_back(lift(m));
  return Flow(std::move(times), std::move(ext));
}

std::size_t Flow::index_at(double t) const {
  try {
    return nearest_time_index(times_, t);
  } catch (const OutOfRange&) {
    throw InvalidArgument("Flow: time " + std::to_string(t) + " not covered");
  }
}

void Flow::require_covers(double s, double r) const {
  const double eps = 1e-9;
  if (times_.empty() || s < times_.front() - eps || r > times_.back() + eps) {
    throw InvalidArgument("Flow: interval [" + std::to_string(s) + ", " +
                          std::to_string(r) + "] not covered");
  }
}

Flow Flow::restrict(double s, double r) const {
  std::vector<double> t;
  std::vector<ExtendedMeasure> sl;
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (times_[k] >= s - 1e-9 && times_[k] <= r + 1e-9) {
      t.push_back(times_[k]);
      sl.push_back(slices_[k]);
    }
  }
  return Flow(std::move(t), std::move(sl));
}

std::vector<double> uniform_times(double s, double r, int steps) {
  if (steps < 1) throw InvalidArgument("uniform_times: steps must be >= 1");
  if (!(r >= s)) throw InvalidArgument("uniform_times: r < s");
  if (r == s) return {s};
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) {
    t[static_cast<std::size_t>(k)] = s + (r - s) * k / steps;
  }
  t.back() = r;
  return t;
}

PathMeasure restrict_paths(const PathMeasure& chi, double s, double r) {
  std::vector<std::size_t> keep;
  PathMeasure out;
  for (std::size_t k = 0; k < chi.times.size(); ++k) {
    if (chi.times[k] >= s - 1e-9 && chi.times[k] <= r + 1e-9) {
      keep.push_back(k);
      out.times.push_back(chi.times[k]);
    }
  }
  if (keep.empty()) throw OutOfRange("restrict_paths: no grid times in range");
  for (const auto& a : chi.atoms) {
    Trajectory tr;
    tr.reserve(keep.size());
    for (std::size_t k : keep) tr.push_back(a.point[k]);
    out.atoms.push_back({std::move(tr), a.weight});
  }
  return out;
}

}  // namespace mfgv
