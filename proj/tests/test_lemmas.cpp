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
#include <random>

#include "doctest.h"
#include "mfgv/error.hpp"
#include "mfgv/lemmas.hpp"
#include "mfgv/wasserstein.hpp"

namespace mfgv {
namespace {

LemmaConfig small_config() {
  LemmaConfig c;
  c.lattice_n = 32;
  c.steps = 16;
  c.instances = 10;
  c.action_instances = 40;
  c.atoms = 16;
  c.necessity_pairs = 8;
  return c;
}

const MFGSolution& crowd_solution() {
  static const MFGSolution sol = [] {
    const TorusLattice lat(1, 32);
    DiscreteMeasure m0;
    for (std::size_t i = 0; i < 32; i += 3) m0.atoms.push_back({lat.node(i), 1.0});
    normalize(m0);
    MfgOptions o;
    o.steps = 16;
    o.lattice_n = 32;
    return solve_mfg(make_model("crowd-aversion-1d"), 0.0, 1.0, m0, o);
  }();
  return sol;
}

TEST_CASE("slack calibration") {
  const SlackCalibration cal = calibrate_slack();
  REQUIRE(cal.levels.size() == 3);
  for (const auto& lv : cal.levels) {
    CHECK(lv.zero_error == 0.0);
    CHECK(lv.hopf_lax_error > 0.0);
    CHECK(lv.hopf_lax_error <= cal.slack.c_interp * (lv.h + lv.dt) + 1e-15);
  }
  // The Hopf-Lax error halves with the grid.
  CHECK(cal.levels[2].hopf_lax_error < 0.6 * cal.levels[1].hopf_lax_error);
  CHECK(cal.slack.eps(0.0, 0.0) == 0.0);
}

TEST_CASE("random instances") {
  std::mt19937_64 rng(5);
  const DiscreteMeasure m = random_measure(1, 12, rng);
  CHECK(m.size() == 12);
  CHECK(std::fabs(total_mass(m) - 1.0) < 1e-12);
  const FlowFn flow = moving_flow(m, 0.7, rng);
  CHECK(w1_distance(flow(0.0), m) < 1e-15);
  CHECK(w1_distance(flow(0.2), flow(0.5)) <= 0.7 * 0.3 + 1e-12);
  const GridFunction psi = random_payoff(TorusLattice(1, 32), rng, 0.5);
  CHECK(psi.sup_norm() <= 0.5 * (1.0 + 0.5 + 1.0 / 3.0) + 1e-12);
  CHECK_THROWS_AS(random_measure(1, 0, rng), InvalidArgument);
}

TEST_CASE("action continuity holds and is tight") {
  const PropertyResult res = action_continuity_property(small_config());
  CHECK(res.report.pass());
  CHECK(res.report.at("action_continuity.tight").residual < 1e-12);
  CHECK(res.table.rows.size() > 40);
}

TEST_CASE("semigroup residual is first order on aligned presets") {
  for (const char* name : {"crowd-aversion-1d", "drift-1d"}) {
    const PropertyResult res = semigroup_property(make_model(name), small_config());
    INFO(name);
    CHECK(res.report.pass());
    REQUIRE(res.table.rows.size() == 3);
    CHECK(res.table.rows[2][3] < res.table.rows[0][3]);
  }
  const PropertyResult zero = semigroup_property(make_model("zero"), small_config());
  CHECK(zero.report.pass());
  CHECK(zero.table.rows[0][3] == 0.0);
}

TEST_CASE("Lipschitz and continuity bounds hold without slack") {
  const ModelSpec model = make_model("crowd-aversion-1d");
  const SlackModel none;
  const SlackModel tiny{1e-12};
  CHECK(lipschitz_property(model, small_config(), tiny).report.pass());
  const PropertyResult cont = continuity_property(model, small_config(), none);
  for (const auto& c : cont.report.checks) {
    INFO(c.name << " " << c.residual);
    CHECK(c.pass);
  }
}

TEST_CASE("necessity estimates on an equilibrium, and a detected fault") {
  const ModelSpec model = make_model("crowd-aversion-1d");
  const SlackModel slack = calibrate_slack().slack;
  const PropertyResult res = necessity_property(model, crowd_solution(), small_config(), slack);
  for (const auto& c : res.report.checks) {
    INFO(c.name << " " << c.residual);
    CHECK(c.pass);
  }
  MFGSolution bad = crowd_solution();
  for (auto& v : bad.V) v = v.plus(-static_cast<double>(&v - bad.V.data()));
  const PropertyResult broken = necessity_property(model, bad, small_config(), slack);
  CHECK_FALSE(broken.report.at("necessity_frozen").pass);
  CHECK_FALSE(broken.report.at("necessity_action").pass);
  CHECK_THROWS_AS(necessity_property(model, MFGSolution{}, small_config(), slack), InvalidArgument);
}

TEST_CASE("chain invariants") {
  const ModelSpec model = make_model("crowd-aversion-1d");
  ChainResult cr;
  cr.steps = {{0.0, 0.5, 0, 0.0, 0.0, 0.01}, {0.5, 1.0, 0, 0.0, 0.0, 0.01}};
  cr.backward = 0.04;
  cr.action_gap = 0.0;
  CHECK(chain_property(model, {{2, cr}}).report.pass());
  cr.backward = 0.2;
  cr.steps[1].drift = 100.0;
  const Report rep = chain_property(model, {{2, cr}}).report;
  CHECK_FALSE(rep.at("chain.N2.backward").pass);
  CHECK_FALSE(rep.at("chain.N2.drift").pass);
  CHECK(rep.at("chain.N2.action").pass);
}

}  // namespace
}  // namespace mfgv
