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
#include "mfgv/gamedyn.hpp"
#include "mfgv/wasserstein.hpp"
#include "test_util.hpp"

namespace mfgv {
namespace {

DiscreteMeasure node_measure(const TorusLattice& lat, int atoms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> nodes(lat.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = i;
  std::shuffle(nodes.begin(), nodes.end(), rng);
  DiscreteMeasure m;
  for (int i = 0; i < atoms; ++i) m.atoms.push_back({lat.node(nodes[static_cast<std::size_t>(i)]), 1.0});
  normalize(m);
  return m;
}

MfgOptions small_options() {
  MfgOptions o;
  o.steps = 16;
  o.lattice_n = 32;
  return o;
}

const MFGSolution& crowd_solution() {
  static const MFGSolution sol = [] {
    const MfgOptions o = small_options();
    return solve_mfg(make_model("crowd-aversion-1d"), 0.0, 1.0,
                     node_measure(TorusLattice(1, o.lattice_n), 10, 21), o);
  }();
  return sol;
}

TEST_CASE("trivial step has zero residuals") {
  std::mt19937_64 rng(1);
  const TorusLattice lat(1, 32);
  const PsiStep st = trivial_step(0.3, testing::rand_measure(1, 5, rng), testing::rand_trig(lat, rng));
  const Report rep = psi_check(make_model("crowd-aversion-1d"), st, 1e-12);
  CHECK(rep.pass());
  for (const auto& c : rep.checks) CHECK(c.residual == 0.0);
}

TEST_CASE("restrictions of an equilibrium are steps") {
  const ModelSpec model = make_model("crowd-aversion-1d");
  const MFGSolution& sol = crowd_solution();
  REQUIRE(verify_solution(model, sol, 1e-8).pass());
  for (const auto& [s, r] : {std::pair{0.0, 1.0}, {0.25, 0.5}, {0.5, 0.5625}, {0.75, 1.0}}) {
    const PsiStep st = restrict_solution(sol, s, r);
    const Report rep = psi_check(model, st, 1e-8);
    for (const auto& c : rep.checks) {
      INFO(s << " " << r << " " << c.name << " " << c.residual);
      CHECK(c.pass);
    }
  }
}

TEST_CASE("perturbed terminal payoff is detected") {
  const ModelSpec model = make_model("crowd-aversion-1d");
  PsiStep st = restrict_solution(crowd_solution(), 0.5, 1.0);
  const PsiStep shifted = [&] {
    PsiStep p = st;
    p.psi = p.psi.plus(0.1);
    return p;
  }();
  CHECK(std::fabs(psi_check(model, shifted, 1e-6).at("bellman").residual - 0.1) < 1e-12);
  // Raising the maximum node by 0.1 lifts every value whose optimal path ends there.
  std::vector<double> v = st.psi.values();
  *std::max_element(v.begin(), v.end()) += 0.1;
  st.psi = GridFunction(st.psi.lattice(), v);
  const double res = psi_check(model, st, 1e-6).at("bellman").residual;
  CHECK(res > 0.05);
  CHECK(res <= 0.1 + 1e-12);
}

TEST_CASE("psi_generate recovers a restriction and rejects shifted candidates") {
  const ModelSpec model = make_model("crowd-aversion-1d");
  const MFGSolution& sol = crowd_solution();
  const PsiStep ref = restrict_solution(sol, 0.5, 1.0);
  MfgOptions o = small_options();
  o.steps = 8;
  const PsiGeneration gen =
      psi_generate(model, 0.5, 1.0, ref.m, ref.phi, {ref.psi.plus(1.0), ref.psi}, 1e-6, o);
  REQUIRE(gen.steps.size() == 1);
  CHECK(gen.accepted[0] == 1);
  CHECK(std::fabs(gen.bellman[0] - 1.0) < 1e-6);
  CHECK(gen.bellman[1] < 1e-6);
  CHECK(w1_distance(gen.steps[0].mu, ref.mu) < 1e-6);
  CHECK(psi_check(model, gen.steps[0], 1e-6).pass());
}

TEST_CASE("psi_generate on zero dynamics") {
  const ModelSpec model = make_model("zero");
  const TorusLattice lat(1, 16);
  const GridFunction zero = GridFunction::sample(lat, [](const TorusPoint&) { return 0.0; });
  std::mt19937_64 rng(2);
  const DiscreteMeasure m = testing::rand_measure(1, 4, rng);
  MfgOptions o = small_options();
  o.steps = 4;
  const PsiGeneration gen = psi_generate(model, 0.0, 0.5, m, zero, {zero}, 1e-12, o);
  REQUIRE(gen.steps.size() == 1);
  CHECK(w1_distance(gen.steps[0].mu, m) == 0.0);
  const PsiGeneration same_time = psi_generate(model, 0.5, 0.5, m, zero, {zero, zero.plus(1.0)}, 1e-12, o);
  CHECK(same_time.steps.size() == 1);
  CHECK(same_time.bellman[1] == 1.0);
}

TEST_CASE("composition and splitting of steps") {
  const ModelSpec model = make_model("crowd-aversion-1d");
  const MFGSolution& sol = crowd_solution();
  const PsiStep a = restrict_solution(sol, 0.0, 0.5), b = restrict_solution(sol, 0.5, 1.0);
  const PsiStep ab = compose_steps(model, a, b, 1e-9);
  CHECK(psi_check(model, ab, 1e-8).pass());
  CHECK(ab.s == 0.0);
  CHECK(ab.r == 1.0);
  CHECK(psi_compose_check(model, a, b, 1e-8).pass());

  const PsiStep end = trivial_step(1.0, b.mu, b.psi);
  const PsiStep same = compose_steps(model, b, end, 1e-9);
  CHECK(path_flow_mismatch(same.chi, b.nu_flow) == 0.0);
  CHECK(sup_distance(same.psi, b.psi) == 0.0);

  PsiStep bad = b;
  bad.phi = bad.phi.plus(0.01);
  CHECK_THROWS_AS(compose_steps(model, a, bad, 1e-9), PreconditionViolation);
  CHECK_THROWS_AS(compose_steps(model, b, a, 1e-9), PreconditionViolation);

  const auto [left, right] = split_step(model, restrict_solution(sol, 0.0, 1.0), 0.5);
  CHECK(left.r == 0.5);
  CHECK(right.s == 0.5);
  CHECK(psi_check(model, left, 1e-8).pass());
  CHECK(psi_check(model, right, 1e-8).pass());
  CHECK(sup_distance(left.psi, sol.V[8]) < 1e-12);
}

TEST_CASE("malformed steps report NaN") {
  PsiStep st;
  const Report rep = psi_check(make_model("zero"), st, 1.0);
  CHECK_FALSE(rep.pass());
  CHECK(std::isnan(rep.at("action").residual));
}

}  // namespace
}  // namespace mfgv
