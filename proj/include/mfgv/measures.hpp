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

#ifndef MFGV_MEASURES_HPP_
#define MFGV_MEASURES_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "mfgv/error.hpp"
#include "mfgv/grid_function.hpp"
#include "mfgv/torus.hpp"

namespace mfgv {

/// Point (x, z) of the extended phase space T^d x R.
struct ExtendedPoint {
  TorusPoint x;
  double z = 0.0;
};

/// Velocity (a, b) in R^d x R attached to an extended base point.
struct Velocity {
  Coords a{};
  double b = 0.0;
};

/// State samples of one trajectory on a shared time grid.
using Trajectory = std::vector<ExtendedPoint>;

template <class P>
struct Atom {
  P point;
  double weight = 0.0;
};

/// Finite probability measure: nonnegative weights summing to one.
template <class P>
struct Measure {
  std::vector<Atom<P>> atoms;

  std::size_t size() const { return atoms.size(); }
  bool empty() const { return atoms.empty(); }
};

using DiscreteMeasure = Measure<TorusPoint>;
using ExtendedMeasure = Measure<ExtendedPoint>;

/// Weighted trajectories sampled on a common, strictly increasing grid.
struct PathMeasure {
  std::vector<double> times;
  std::vector<Atom<Trajectory>> atoms;

  std::size_t size() const { return atoms.size(); }
};

template <class L, class R>
struct PlanAtom {
  L left;
  R right;
  double weight = 0.0;
};

/// Coupling stored as an explicit list of weighted pairs.
template <class L, class R>
struct Plan {
  std::vector<PlanAtom<L, R>> atoms;
};

/// Distribution of (base point, velocity) pairs.
using VelocityPlan = Plan<ExtendedPoint, Velocity>;

inline constexpr double kMassTol = 1e-12;
inline constexpr double kMatchTol = 1e-9;

// -- atom matching ----------------------------------------------------------

/// Hashable key: coordinates rounded to kMatchTol. Torus coordinates are
/// reduced modulo one after rounding so 0.9999999999 and 0 collide.
using AtomKey = std::array<std::int64_t, 5>;

AtomKey atom_key(const TorusPoint& p);
AtomKey atom_key(const ExtendedPoint& p);
AtomKey atom_key(const Velocity& v);

inline int point_dim(const TorusPoint& p) { return p.dim; }
inline int point_dim(const ExtendedPoint& p) { return p.x.dim; }

// -- validation --------------------------------------------------------------

double total_mass(const DiscreteMeasure& m);
double total_mass(const ExtendedMeasure& m);

/// Throws InvalidArgument unless the measure is nonempty, nonnegative, of
/// unit mass within kMassTol, dimensionally uniform and finite.
void validate(const DiscreteMeasure& m);
void validate(const ExtendedMeasure& m);
void validate(const PathMeasure& chi);

template <class P>
int measure_dim(const Measure<P>& m) {
  if (m.atoms.empty()) throw InvalidArgument("measure has no atoms");
  return point_dim(m.atoms.front().point);
}

/// Rescales weights to sum to one (for roundoff repair after arithmetic).
template <class P>
void normalize(Measure<P>& m) {
  double s = 0.0;
  for (const auto& a : m.atoms) s += a.weight;
  if (!(s > 0.0)) throw InvalidArgument("measure has zero mass");
  for (auto& a : m.atoms) a.weight /= s;
}

/// Merges atoms whose keys coincide; keeps the first representative and the
/// order of first appearance.
template <class P>
Measure<P> merge_duplicates(const Measure<P>& m) {
  Measure<P> out;
  std::map<AtomKey, std::size_t> slot;
  for (const auto& a : m.atoms) {
    const auto [it, fresh] = slot.emplace(atom_key(a.point), out.atoms.size());
    if (fresh) {
      out.atoms.push_back(a);
    } else {
      out.atoms[it->second].weight += a.weight;
    }
  }
  return out;
}

// -- constructors ------------------------------------------------------------

DiscreteMeasure dirac(const TorusPoint& x);
DiscreteMeasure uniform_measure(const std::vector<TorusPoint>& points);

// -- calculus ----------------------------------------------------------------

/// h_# m. Atoms keep their weights; duplicates merge only when asked.
template <class P, class Q>
Measure<Q> pushforward(const Measure<P>& m, const std::function<Q(const P&)>& h,
                       bool merge = false) {
  Measure<Q> out;
  out.atoms.reserve(m.atoms.size());
  for (const auto& a : m.atoms) out.atoms.push_back({h(a.point), a.weight});
  return merge ? merge_duplicates(out) : out;
}

DiscreteMeasure project(const ExtendedMeasure& nu);
ExtendedMeasure lift(const DiscreteMeasure& m);

/// [phi, nu] = sum_i w_i (phi(x_i) + z_i).
double action(const GridFunction& phi, const ExtendedMeasure& nu);

/// Index of the grid time nearest to t. Throws OutOfRange when t lies
/// outside [t_0, t_K] by more than 1e-9.
std::size_t nearest_time_index(const std::vector<double>& times, double t);

/// Slice of chi at the grid time nearest to t.
ExtendedMeasure evaluate(const PathMeasure& chi, double t);
ExtendedMeasure evaluate_index(const PathMeasure& chi, std::size_t k);

template <class L, class R>
Measure<L> left_marginal(const Plan<L, R>& p) {
  Measure<L> m;
  for (const auto& a : p.atoms) m.atoms.push_back({a.left, a.weight});
  return merge_duplicates(m);
}

template <class L, class R>
Measure<R> right_marginal(const Plan<L, R>& p) {
  Measure<R> m;
  for (const auto& a : p.atoms) m.atoms.push_back({a.right, a.weight});
  return merge_duplicates(m);
}

/// Composition through a shared middle marginal: the mass on (x, z) is
/// sum_y pi12(x, y) pi23(y, z) / mass(y).
template <class L, class M, class R>
Plan<L, R> compose_plans(const Plan<L, M>& p12, const Plan<M, R>& p23) {
  std::map<AtomKey, double> mid12, mid23;
  for (const auto& a : p12.atoms) mid12[atom_key(a.right)] += a.weight;
  for (const auto& a : p23.atoms) mid23[atom_key(a.left)] += a.weight;
  auto mismatch = [](const std::map<AtomKey, double>& x,
                     const std::map<AtomKey, double>& y) {
    for (const auto& [k, w] : x) {
      const auto it = y.find(k);
      const double o = it == y.end() ? 0.0 : it->second;
      if (std::fabs(w - o) > kMatchTol) return true;
    }
    return false;
  };
  if (mismatch(mid12, mid23) || mismatch(mid23, mid12)) {
    throw PreconditionViolation("compose_plans: middle marginals differ");
  }
  std::map<AtomKey, std::vector<const PlanAtom<M, R>*>> by_mid;
  for (const auto& a : p23.atoms) by_mid[atom_key(a.left)].push_back(&a);
  Plan<L, R> out;
  for (const auto& a : p12.atoms) {
    const AtomKey k = atom_key(a.right);
    const double mass = mid12[k];
    if (!(mass > 0.0)) continue;
    for (const auto* b : by_mid[k]) {
      const double w = a.weight * b->weight / mass;
      if (w > 0.0) out.atoms.push_back({a.left, b->right, w});
    }
  }
  return out;
}

/// Splices every chi1 path ending at an endpoint atom with every chi2 path
/// starting there, with conditional product weights.
PathMeasure concat_path_measures(const PathMeasure& chi1, const PathMeasure& chi2);

/// Replaces the initial running-reward coordinates of chi by draws from
/// nu_star, conditioned on x(s). Within a fiber the z values are coupled
/// monotonically, so nu_star equal to the current initial slice returns chi.
PathMeasure reanchor_flow(const PathMeasure& chi, const ExtendedMeasure& nu_star);

/// Merges paths with identical state sequences (after key rounding).
PathMeasure merge_identical_paths(const PathMeasure& chi);

/// Time-indexed family of extended measures with cached projections.
class Flow {
 public:
  Flow() = default;
  Flow(std::vector<double> times, std::vector<ExtendedMeasure> slices);

  /// Slices e_t# chi for every grid time of chi.
  static Flow from_paths(const PathMeasure& chi);
  /// The same lifted measure at every time.
  static Flow constant(const std::vector<double>& times, const ExtendedMeasure& nu);
  static Flow from_projected(std::vector<double> times,
                             const std::vector<DiscreteMeasure>& slices);

  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const ExtendedMeasure& extended(std::size_t k) const { return slices_[k]; }
  const DiscreteMeasure& projected(std::size_t k) const { return projected_[k]; }

  /// Nearest grid index; InvalidArgument when t is not covered.
  std::size_t index_at(double t) const;
  const DiscreteMeasure& at(double t) const { return projected_[index_at(t)]; }

  /// Throws InvalidArgument unless [s, r] lies within the grid.
  void require_covers(double s, double r) const;

  /// Sub-flow on the grid times lying in [s, r].
  Flow restrict(double s, double r) const;

 private:
  std::vector<double> times_;
  std::vector<ExtendedMeasure> slices_;
  std::vector<DiscreteMeasure> projected_;
};

/// Uniform grid s, s + (r-s)/steps, ..., r.
std::vector<double> uniform_times(double s, double r, int steps);

/// Restriction of chi to its grid times in [s, r].
PathMeasure restrict_paths(const PathMeasure& chi, double s, double r);

}  // namespace mfgv

#endif  // MFGV_MEASURES_HPP_
