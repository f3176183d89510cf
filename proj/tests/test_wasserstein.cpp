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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mfgv/error.hpp"
#include "mfgv/wasserstein.hpp"
#include "test_util.hpp"

namespace mfgv {
namespace {

using testing::rand_measure;

TEST_CASE("w1 examples") {
  const auto r = w1(dirac(torus_point(0.2)), dirac(torus_point(0.5)));
  CHECK(r.distance == doctest::Approx(0.3));
  std::mt19937_64 rng(1);
  const DiscreteMeasure m = rand_measure(1, 5, rng);
  const auto self = w1(m, m);
  CHECK(self.distance < 1e-15);
  for (const auto& a : self.plan.atoms) CHECK(torus_dist(a.left, a.right) < 1e-15);
  CHECK_THROWS_AS(w1(m, rand_measure(2, 3, rng)), InvalidArgument);
  CHECK_THROWS_AS(w1(m, m, Ground::kExtended), InvalidArgument);
}

TEST_CASE("w1 agrees with permutation brute force") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const int dim = 1 + trial % 2;
    const int n = 2 + trial % 5;
    const DiscreteMeasure a = rand_measure(dim, n, rng, true);
    const DiscreteMeasure b = rand_measure(dim, n, rng, true);
    const double want = testing::brute_matching(static_cast<std::size_t>(n), [&](std::size_t i, std::size_t j) {
      return torus_dist(a.atoms[i].point, b.atoms[j].point);
    });
    const auto got = w1(a, b);
    CHECK(got.distance == doctest::Approx(want).epsilon(1e-12));
    // The plan is a coupling that attains the distance.
    double cost = 0.0;
    for (const auto& e : got.plan.atoms) cost += e.weight * torus_dist(e.left, e.right);
    CHECK(cost == doctest::Approx(got.distance).epsilon(1e-12));
    const auto lm = left_marginal(got.plan);
    CHECK(w1(lm, a).distance < 1e-12);
  }
}

TEST_CASE("circle formula matches exact transport") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const DiscreteMeasure a = rand_measure(1, 1 + trial % 9, rng);
    const DiscreteMeasure b = rand_measure(1, 1 + (trial * 7) % 11, rng);
    CHECK(w1_circle(a, b) == doctest::Approx(w1(a, b).distance).epsilon(1e-10));
  }
}

TEST_CASE("metric axioms") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + trial % 2;
    const auto a = rand_measure(dim, 4, rng), b = rand_measure(dim, 5, rng),
               c = rand_measure(dim, 3, rng);
    const double ab = w1(a, b).distance, ba = w1(b, a).distance;
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(w1(a, c).distance <= ab + w1(b, c).distance + 1e-9);
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("extended and path ground metrics") {
  ExtendedMeasure a, b;
  a.atoms = {{{torus_point(0.1), 1.0}, 1.0}};
  b.atoms = {{{torus_point(0.3), -0.5}, 1.0}};
  CHECK(w1(a, b).distance == doctest::Approx(0.2 + 1.5));
  PathMeasure p, q;
  p.times = q.times = {0.0, 1.0};
  p.atoms = {{{{torus_point(0.1), 0.0}, {torus_point(0.2), 0.0}}, 1.0}};
  q.atoms = {{{{torus_point(0.1), 0.0}, {torus_point(0.5), 0.1}}, 1.0}};
  CHECK(w1(p, q).distance == doctest::Approx(0.4));
}

TEST_CASE("dual lower bound") {
  const TorusLattice lat(1, 64);
  std::mt19937_64 rng(5);
  const auto m1 = rand_measure(1, 3, rng), m2 = rand_measure(1, 4, rng);
  CHECK(w1_dual_lower_bound(m1, m2, GridFunction::constant(lat, 0.0)) == 0.0);
  const GridFunction phi = testing::with_lipschitz(testing::rand_trig(lat, rng), 1.0);
  CHECK(w1_dual_lower_bound(m1, m1, phi) == doctest::Approx(0.0));
  const GridFunction tent = GridFunction::sample(
      lat, [](const TorusPoint& x) { return torus_dist(x, torus_point(0.5)); });
  const auto p = dirac(torus_point(0.2)), q = dirac(torus_point(0.5));
  const double dual = w1_dual_lower_bound(p, q, tent);
  CHECK(dual == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(dual == doctest::Approx(w1(p, q).distance).epsilon(1e-12));
  CHECK_THROWS_AS(w1_dual_lower_bound(p, q, testing::with_lipschitz(phi, 2.0)),
                  PreconditionViolation);
}

// Best lattice 1-Lipschitz potential: slopes sign(D - c) on the lattice
// cells of the interpolation-projected measures.
GridFunction lattice_potential(const DiscreteMeasure& a, const DiscreteMeasure& b, int n) {
  std::vector<double> mass(n, 0.0);
  auto spread = [&](const DiscreteMeasure& m, double sgn) {
    for (const auto& at : m.atoms) {
      const double p = at.point[0] * n;
      const int i = static_cast<int>(std::floor(p)) % n;
      const double f = p - std::floor(p);
      mass[i] += sgn * at.weight * (1 - f);
      mass[(i + 1) % n] += sgn * at.weight * f;
    }
  };
  spread(a, 1.0);
  spread(b, -1.0);
  // D on cell [i, i+1) is the cumulative mass through node i.
  std::vector<double> D(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) D[i] = (acc += mass[i]);
  std::vector<double> sorted = D;
  std::sort(sorted.begin(), sorted.end());
  const double c = sorted[static_cast<std::size_t>((n - 1) / 2)];
  std::vector<double> slope(n);
  int ties = 0;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::fabs(D[i] - c) < 1e-14) {
      ++ties;
      slope[i] = 0.0;
    } else {
      slope[i] = D[i] > c ? -1.0 : 1.0;
      sum += slope[i];
    }
  }
  for (int i = 0; i < n; ++i) {
    if (std::fabs(D[i] - c) < 1e-14) slope[i] = -sum / ties;
  }
  std::vector<double> v(n);
  double phi = 0.0;
  for (int i = 0; i < n; ++i) {
    v[(i + 1) % n] = (phi += slope[i] / n);
  }
  return GridFunction(TorusLattice(1, n), v);
}

TEST_CASE("primal-dual gap closes under lattice refinement") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = rand_measure(1, 5, rng), b = rand_measure(1, 6, rng);
    const double primal = w1(a, b).distance;
    double prev_gap = 1e9;
    for (int n : {8, 32, 128, 512}) {
      const GridFunction phi = lattice_potential(a, b, n);
      REQUIRE(phi.lipschitz() <= 1.0 + 1e-9);
      const double dual = w1_dual_lower_bound(a, b, phi);
      CHECK(dual <= primal + 1e-9);
      const double gap = primal - dual;
      CHECK(gap <= 1.0 / n + 1e-9);
      CHECK(gap <= prev_gap + 1e-9);
      prev_gap = std::min(prev_gap, gap);
    }
  }
}

}  // namespace
}  // namespace mfgv
