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

#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "mfgv/error.hpp"
#include "mfgv/measures.hpp"
#include "mfgv/wasserstein.hpp"
#include "test_util.hpp"

namespace mfgv {
namespace {

using testing::rand_extended;
using testing::rand_measure;
using testing::rand_trig;

PathMeasure constant_paths(const ExtendedMeasure& nu, const std::vector<double>& times) {
  PathMeasure chi;
  chi.times = times;
  for (const auto& a : nu.atoms) chi.atoms.push_back({Trajectory(times.size(), a.point), a.weight});
  return chi;
}

TEST_CASE("pushforward examples") {
  std::mt19937_64 rng(1);
  const DiscreteMeasure m = rand_measure(1, 5, rng);
  const auto id = pushforward<TorusPoint, TorusPoint>(m, [](const TorusPoint& x) { return x; });
  REQUIRE(id.size() == m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(id.atoms[i].point == m.atoms[i].point);
    CHECK(id.atoms[i].weight == m.atoms[i].weight);
  }
  auto shift = [](const TorusPoint& x) { return torus_point(x[0] + 0.25); };
  const auto moved = pushforward<TorusPoint, TorusPoint>(dirac(torus_point(0.9)), shift);
  CHECK(moved.atoms[0].point[0] == doctest::Approx(0.15));

  DiscreteMeasure two;
  two.atoms = {{torus_point(0.1), 0.5}, {torus_point(0.6), 0.5}};
  auto dbl = [](const TorusPoint& x) { return torus_point(2 * x[0]); };
  const auto merged = pushforward<TorusPoint, TorusPoint>(two, dbl, true);
  REQUIRE(merged.size() == 1);
  CHECK(merged.atoms[0].point[0] == doctest::Approx(0.2));
  CHECK(merged.atoms[0].weight == doctest::Approx(1.0));
  CHECK(pushforward<TorusPoint, TorusPoint>(two, dbl).size() == 2);
}

TEST_CASE("pushforward is functorial") {
  std::mt19937_64 rng(2);
  const DiscreteMeasure m = rand_measure(2, 6, rng);
  auto h1 = [](const TorusPoint& x) { return torus_point(x[0] + 0.3, 2 * x[1]); };
  auto h2 = [](const TorusPoint& x) { return torus_point(x[1] - 0.7, x[0] * x[0]); };
  const auto a = pushforward<TorusPoint, TorusPoint>(
      pushforward<TorusPoint, TorusPoint>(m, h1), h2);
  const auto b = pushforward<TorusPoint, TorusPoint>(
      m, [&](const TorusPoint& x) { return h2(h1(x)); });
  CHECK(w1(a, b).distance < 1e-12);
}

TEST_CASE("project and lift") {
  std::mt19937_64 rng(3);
  const DiscreteMeasure m = rand_measure(1, 3, rng);
  const DiscreteMeasure back = project(lift(m));
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(back.atoms[i].point == m.atoms[i].point);
    CHECK(back.atoms[i].weight == m.atoms[i].weight);
    CHECK(lift(m).atoms[i].point.z == 0.0);
  }
  ExtendedMeasure nu;
  nu.atoms = {{{torus_point(0.3), 5.0}, 1.0}};
  CHECK(project(nu).atoms[0].point[0] == doctest::Approx(0.3));
  const ExtendedMeasure e = rand_extended(1, 3, rng);
  const DiscreteMeasure pe = project(e);
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(pe.atoms[i].weight == e.atoms[i].weight);
}

TEST_CASE("action examples") {
  const TorusLattice lat(1, 32);
  const GridFunction c = GridFunction::constant(lat, 2.5);
  ExtendedMeasure nu;
  nu.atoms = {{{torus_point(0.0), 1.0}, 0.5}, {{torus_point(0.5), -1.0}, 0.5}};
  CHECK(action(c, nu) == doctest::Approx(2.5));
  CHECK(action(GridFunction::constant(lat, 0.0), nu) == doctest::Approx(0.0));
  std::mt19937_64 rng(4);
  const GridFunction phi = rand_trig(lat, rng);
  const DiscreteMeasure m = rand_measure(1, 4, rng);
  double direct = 0.0;
  for (const auto& a : m.atoms) direct += a.weight * phi(a.point);
  CHECK(action(phi, lift(m)) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("action continuity on random Lipschitz pairs") {
  std::mt19937_64 rng(5);
  const TorusLattice lat(1, 64);
  for (int trial = 0; trial < 100; ++trial) {
    const double K = 0.5 + trial % 5;
    const GridFunction phi = testing::with_lipschitz(rand_trig(lat, rng), K);
    const GridFunction phi2 = testing::with_lipschitz(rand_trig(lat, rng), K);
    const ExtendedMeasure nu = rand_extended(1, 4, rng), nu2 = rand_extended(1, 5, rng);
    const double lhs = std::fabs(action(phi, nu) - action(phi2, nu2));
    // phi(x) + z is max(K, 1)-Lipschitz for the extended metric.
    const double rhs = sup_distance(phi, phi2) + std::max(K, 1.0) * w1(nu, nu2).distance;
    CHECK(lhs <= rhs + 1e-9);
  }
}

TEST_CASE("evaluate snaps to the nearest grid time") {
  std::mt19937_64 rng(6);
  const ExtendedMeasure nu = rand_extended(1, 3, rng);
  const PathMeasure chi = constant_paths(nu, {0.0, 0.5, 1.0});
  const ExtendedMeasure at = evaluate(chi, 0.7);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    CHECK(at.atoms[i].point.z == nu.atoms[i].point.z);
  }
  CHECK(nearest_time_index(chi.times, 0.74) == 1);
  CHECK(nearest_time_index(chi.times, 0.76) == 2);
  CHECK(nearest_time_index(chi.times, 0.25) == 0);
  CHECK_THROWS_AS(evaluate(chi, 1.1), OutOfRange);
  CHECK_THROWS_AS(evaluate(chi, -0.01), OutOfRange);
}

TEST_CASE("compose plans") {
  using P = Plan<TorusPoint, TorusPoint>;
  DiscreteMeasure m;
  m.atoms = {{torus_point(0.1), 0.4}, {torus_point(0.5), 0.6}};
  P id;
  for (const auto& a : m.atoms) id.atoms.push_back({a.point, a.point, a.weight});
  P p23;
  p23.atoms = {{torus_point(0.1), torus_point(0.7), 0.1},
               {torus_point(0.1), torus_point(0.2), 0.3},
               {torus_point(0.5), torus_point(0.2), 0.6}};
  const P c = compose_plans(id, p23);
  REQUIRE(c.atoms.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(c.atoms[i].right == p23.atoms[i].right);
    CHECK(c.atoms[i].weight == doctest::Approx(p23.atoms[i].weight));
  }

  // Products compose to the product of the outer marginals.
  DiscreteMeasure a, b;
  a.atoms = {{torus_point(0.0), 0.3}, {torus_point(0.3), 0.7}};
  b.atoms = {{torus_point(0.6), 0.5}, {torus_point(0.9), 0.5}};
  P pa, pb;
  for (const auto& x : a.atoms)
    for (const auto& y : m.atoms) pa.atoms.push_back({x.point, y.point, x.weight * y.weight});
  for (const auto& y : m.atoms)
    for (const auto& z : b.atoms) pb.atoms.push_back({y.point, z.point, y.weight * z.weight});
  std::map<std::pair<double, double>, double> mass;
  for (const auto& e : compose_plans(pa, pb).atoms) mass[{e.left[0], e.right[0]}] += e.weight;
  for (const auto& x : a.atoms)
    for (const auto& z : b.atoms)
      CHECK(mass[{x.point[0], z.point[0]}] == doctest::Approx(x.weight * z.weight));
}

TEST_CASE("compose plans matches the direct triple sum") {
  using P = Plan<TorusPoint, TorusPoint>;
  const double xs[3] = {0.05, 0.35, 0.65}, ys[2] = {0.2, 0.8}, zs[2] = {0.4, 0.9};
  // Joint tables pi12[x][y] and pi23[y][z] with shared middle marginal.
  const double p12[3][2] = {{0.10, 0.15}, {0.20, 0.05}, {0.10, 0.40}};
  const double my[2] = {0.40, 0.60};
  const double cond23[2][2] = {{0.25, 0.75}, {0.6, 0.4}};
  P a, b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) a.atoms.push_back({torus_point(xs[i]), torus_point(ys[j]), p12[i][j]});
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      b.atoms.push_back({torus_point(ys[j]), torus_point(zs[k]), my[j] * cond23[j][k]});
  std::map<std::pair<double, double>, double> got;
  for (const auto& e : compose_plans(a, b).atoms) got[{e.left[0], e.right[0]}] += e.weight;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 2; ++k) {
      double want = 0.0;
      for (int j = 0; j < 2; ++j) want += (p12[i][j] / my[j]) * (my[j] * cond23[j][k]) * 1.0;
      CHECK(got[{torus_point(xs[i])[0], torus_point(zs[k])[0]}] == doctest::Approx(want));
    }
  }
  P bad = b;
  bad.atoms[0].weight += 0.05;
  bad.atoms[1].weight -= 0.05;
  bad.atoms[2].weight += 0.0;
  bad.atoms[0].left = torus_point(0.3);
  CHECK_THROWS_AS(compose_plans(a, bad), PreconditionViolation);
}

TEST_CASE("concatenation") {
  const std::vector<double> t1 = {0.0, 0.5}, t2 = {0.5, 1.0};
  PathMeasure a;
  a.times = t1;
  a.atoms = {{{{torus_point(0.1), 0.0}, {torus_point(0.2), 0.3}}, 1.0}};
  PathMeasure cont = constant_paths(evaluate(a, 0.5), t2);
  const PathMeasure glued = concat_path_measures(a, cont);
  REQUIRE(glued.size() == 1);
  CHECK(glued.times.size() == 3);
  CHECK(glued.atoms[0].weight == doctest::Approx(1.0));
  CHECK(glued.atoms[0].point[2].z == doctest::Approx(0.3));

  // 2 x 2 branching at a shared endpoint.
  const ExtendedPoint w0{torus_point(0.5), 0.0};
  PathMeasure left;
  left.times = t1;
  left.atoms = {{{{torus_point(0.4), 0.0}, w0}, 0.3}, {{{torus_point(0.6), 0.1}, w0}, 0.7}};
  PathMeasure right;
  right.times = t2;
  right.atoms = {{{w0, {torus_point(0.7), 0.2}}, 0.4}, {{w0, {torus_point(0.2), -0.2}}, 0.6}};
  const PathMeasure br = concat_path_measures(left, right);
  REQUIRE(br.size() == 4);
  std::map<std::pair<double, double>, double> pairs;
  for (const auto& p : br.atoms) pairs[{p.point[0].x[0], p.point[2].x[0]}] += p.weight;
  for (const auto& l : left.atoms)
    for (const auto& r : right.atoms)
      CHECK(pairs[{l.point[0].x[0], r.point[1].x[0]}] == doctest::Approx(l.weight * r.weight));
  // Slices: before r equal to the left slices, after r to the right ones.
  CHECK(w1(evaluate(br, 0.0), evaluate(left, 0.0)).distance < 1e-12);
  CHECK(w1(evaluate(br, 1.0), evaluate(right, 1.0)).distance < 1e-12);

  PathMeasure wrong = right;
  wrong.atoms[0].point[0].z = 1.0;
  CHECK_THROWS_AS(concat_path_measures(left, wrong), PreconditionViolation);
}

TEST_CASE("reanchoring") {
  std::mt19937_64 rng(8);
  const std::vector<double> times = {0.0, 0.5, 1.0};
  PathMeasure chi;
  chi.times = times;
  std::uniform_real_distribution<double> u(-1, 1);
  const DiscreteMeasure base = rand_measure(1, 4, rng);
  for (const auto& a : base.atoms) {
    Trajectory tr;
    double z = u(rng);
    TorusPoint x = a.point;
    for (std::size_t k = 0; k < times.size(); ++k) {
      tr.push_back({x, z});
      x = torus_point(x[0] + 0.1 * u(rng));
      z += 0.3 * u(rng);
    }
    chi.atoms.push_back({tr, a.weight});
  }
  // Shift to z = 0.
  const PathMeasure zeroed = reanchor_flow(chi, lift(project(evaluate(chi, 0.0))));
  for (const auto& p : zeroed.atoms) CHECK(p.point.front().z == doctest::Approx(0.0));
  // Identity.
  const PathMeasure same = reanchor_flow(chi, evaluate(chi, 0.0));
  CHECK(w1(same, chi).distance < 1e-12);

  // Random anchors with z* in {-1, 1}: action identity for random phi.
  ExtendedMeasure star;
  for (const auto& a : base.atoms) {
    star.atoms.push_back({{a.point, -1.0}, a.weight * 0.3});
    star.atoms.push_back({{a.point, 1.0}, a.weight * 0.7});
  }
  const PathMeasure re = reanchor_flow(chi, star);
  CHECK(w1(evaluate(re, 0.0), star).distance < 1e-12);
  double zs = 0.0, zstar = 0.0;
  for (const auto& a : evaluate(chi, 0.0).atoms) zs += a.weight * a.point.z;
  for (const auto& a : star.atoms) zstar += a.weight * a.point.z;
  const TorusLattice lat(1, 64);
  for (int j = 0; j < 5; ++j) {
    const GridFunction phi = rand_trig(lat, rng);
    for (double t : times) {
      const double lhs = action(phi, evaluate(re, t));
      const double rhs = action(phi, evaluate(chi, t)) - zs + zstar;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
      CHECK(w1_distance(project(evaluate(re, t)), project(evaluate(chi, t))) < 1e-12);
    }
  }
  ExtendedMeasure off = star;
  off.atoms[0].point.x = torus_point(0.999);
  CHECK_THROWS_AS(reanchor_flow(chi, off), PreconditionViolation);
}

TEST_CASE("validation") {
  DiscreteMeasure m;
  CHECK_THROWS_AS(validate(m), InvalidArgument);
  m.atoms = {{torus_point(0.1), 0.5}, {torus_point(0.2), 0.4}};
  CHECK_THROWS_AS(validate(m), InvalidArgument);
  m.atoms[1].weight = 0.5;
  CHECK_NOTHROW(validate(m));
  m.atoms[1].weight = -0.5;
  m.atoms[0].weight = 1.5;
  CHECK_THROWS_AS(validate(m), InvalidArgument);
}

}  // namespace
}  // namespace mfgv
