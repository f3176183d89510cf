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
#include <limits>
#include <random>

#include "doctest.h"
#include "mfgv/error.hpp"
#include "mfgv/torus.hpp"
#include "test_util.hpp"

namespace mfgv {
namespace {

TEST_CASE("wrap reduces modulo one") {
  CHECK(torus_point(1.25)[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(torus_point(0.0)[0] == 0.0);
  const TorusPoint p = torus_point(-0.1, 2.3);
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(torus_point(-1e-18)[0] < 1.0);
  CHECK(torus_point(3.0)[0] == 0.0);
}

TEST_CASE("wrap rejects bad input") {
  const double bad[1] = {std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(wrap(bad), InvalidArgument);
  const double inf[2] = {0.5, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(wrap(inf), InvalidArgument);
  const double three[3] = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS(wrap(three), InvalidArgument);
}

TEST_CASE("torus distance examples") {
  CHECK(torus_dist(torus_point(0.1), torus_point(0.9)) == doctest::Approx(0.2));
  CHECK(torus_dist(torus_point(0.4), torus_point(0.4)) == 0.0);
  const TorusPoint x = torus_point(0.1, 0.1), y = torus_point(0.9, 0.9);
  CHECK(torus_dist(x, y) == doctest::Approx(testing::brute_torus_dist(x, y)).epsilon(1e-14));
  CHECK(torus_dist(x, y) == doctest::Approx(0.2828427).epsilon(1e-6));
  CHECK_THROWS_AS(torus_dist(torus_point(0.1), torus_point(0.1, 0.2)), InvalidArgument);
}

TEST_CASE("torus distance is a bounded, shift-invariant metric") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> shift(-3, 3);
  for (int dim = 1; dim <= 2; ++dim) {
    for (int trial = 0; trial < 500; ++trial) {
      const TorusPoint x = testing::rand_point(dim, rng);
      const TorusPoint y = testing::rand_point(dim, rng);
      const TorusPoint z = testing::rand_point(dim, rng);
      const double dxy = torus_dist(x, y);
      CHECK(dxy == doctest::Approx(testing::brute_torus_dist(x, y)).epsilon(1e-14));
      CHECK(dxy == torus_dist(y, x));
      CHECK(torus_dist(x, z) <= dxy + torus_dist(y, z) + 1e-12);
      CHECK(dxy <= 0.5 * std::sqrt(static_cast<double>(dim)) + 1e-15);
      Coords k{};
      for (int i = 0; i < dim; ++i) k[static_cast<std::size_t>(i)] = shift(rng);
      CHECK(torus_dist(translate(x, k), translate(y, k)) == doctest::Approx(dxy).epsilon(1e-12));
    }
  }
}

TEST_CASE("displacement is the shortest signed offset") {
  const Coords d = displacement(torus_point(0.9), torus_point(0.1));
  CHECK(d[0] == doctest::Approx(0.2));
  const TorusPoint back = translate(torus_point(0.9), d);
  CHECK(torus_dist(back, torus_point(0.1)) < 1e-14);
}

TEST_CASE("lattice nodes") {
  const TorusLattice lat(2, 4);
  CHECK(lat.size() == 16);
  CHECK(lat.node(0) == torus_point(0.0, 0.0));
  CHECK(lat.node(1)[1] == 0.25);
  CHECK(lat.node(4)[0] == 0.25);
  CHECK_THROWS_AS(TorusLattice(1, 1), InvalidArgument);
  CHECK_THROWS_AS(TorusLattice(3, 8), InvalidArgument);
}

}  // namespace
}  // namespace mfgv
