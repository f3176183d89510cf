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
#include <filesystem>
#include <random>

#include "doctest.h"
#include "mfgv/error.hpp"
#include "mfgv/serialize.hpp"
#include "mfgv/wasserstein.hpp"
#include "test_util.hpp"

namespace mfgv {
namespace {

std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("mfgv_test_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

MFGSolution small_solution() {
  const TorusLattice lat(1, 16);
  DiscreteMeasure m0;
  for (std::size_t i = 0; i < 16; i += 5) m0.atoms.push_back({lat.node(i), 1.0});
  normalize(m0);
  MfgOptions o;
  o.steps = 8;
  o.lattice_n = 16;
  return solve_mfg(make_model("crowd-aversion-1d"), 0.0, 0.5, m0, o);
}

TEST_CASE("measure documents round-trip exactly") {
  std::mt19937_64 rng(3);
  for (int dim : {1, 2}) {
    const DiscreteMeasure m = testing::rand_measure(dim, 5, rng);
    const Json j = to_json(m);
    CHECK(j.at("dim") == dim);
    CHECK_FALSE(j.at("atoms")[0].contains("z"));
    const DiscreteMeasure back = measure_from_json(Json::parse(j.dump()));
    REQUIRE(back.size() == m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(back.atoms[i].point == m.atoms[i].point);
      CHECK(back.atoms[i].weight == m.atoms[i].weight);
    }
    const ExtendedMeasure nu = testing::rand_extended(dim, 4, rng);
    const ExtendedMeasure nb = extended_from_json(Json::parse(to_json(nu).dump()));
    CHECK(w1(nu, nb).distance == 0.0);
  }
  const DiscreteMeasure d = measure_from_json(Json::parse(R"({"dim":1,"atoms":[{"x":[1.25],"w":1}]})"));
  CHECK(d.atoms[0].point[0] == 0.25);
}

TEST_CASE("malformed documents are rejected") {
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"atoms":[]})")), InvalidArgument);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"dim":1,"atoms":[{"x":[0.1,0.2],"w":1}]})")),
                  InvalidArgument);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"dim":1,"atoms":[{"x":[0.1],"w":0.5}]})")),
                  InvalidArgument);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"dim":1,"atoms":[{"x":["a"],"w":1}]})")),
                  InvalidArgument);
  CHECK_THROWS_AS(grid_from_json(Json::parse(R"({"n":4,"dim":1,"values":[1,2]})")), InvalidArgument);
  CHECK_THROWS_AS(read_json("/nonexistent/file.json"), InvalidArgument);
}

TEST_CASE("grid functions and reports round-trip") {
  std::mt19937_64 rng(4);
  const GridFunction phi = testing::rand_trig(TorusLattice(2, 6), rng);
  const GridFunction back = grid_from_json(Json::parse(to_json(phi).dump()));
  CHECK(sup_distance(phi, back) == 0.0);
  Report rep;
  rep.add(check_le("a", 0.5, 1.0));
  rep.add(check_ge("b", std::nan(""), 0.0));
  const Report rb = report_from_json(Json::parse(to_json(rep).dump()));
  CHECK(rb.at("a").pass);
  CHECK(rb.at("b").lower);
  CHECK(std::isnan(rb.at("b").residual));
}

TEST_CASE("solutions and steps round-trip through directories") {
  const ModelSpec model = make_model("crowd-aversion-1d");
  const MFGSolution sol = small_solution();
  const std::string dir = temp_dir("solution");
  save_solution(sol, dir);
  CHECK(std::filesystem::exists(std::filesystem::path(dir) / "V_0000.json"));
  const MFGSolution back = load_solution(dir);
  REQUIRE(back.times.size() == sol.times.size());
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    CHECK(sup_distance(back.V[k], sol.V[k]) == 0.0);
    CHECK(w1_distance(back.m_flow[k], sol.m_flow[k]) < 1e-15);
  }
  CHECK(back.profile.size() == sol.profile.size());
  CHECK(back.residuals.converged == sol.residuals.converged);
  const Report a = verify_solution(model, sol, 1e-8), b = verify_solution(model, back, 1e-8);
  for (std::size_t i = 0; i < a.checks.size(); ++i) CHECK(a.checks[i].residual == b.checks[i].residual);

  PsiStep st = restrict_solution(sol, 0.125, 0.375);
  st.residuals = psi_check(model, st, 1e-8);
  const std::string sdir = temp_dir("step");
  save_step(st, sdir);
  const PsiStep sb = load_step(sdir);
  CHECK(sb.s == st.s);
  CHECK(sb.residuals.pass() == st.residuals.pass());
  CHECK(psi_check(model, sb, 1e-8).pass());
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(sdir);
}

}  // namespace
}  // namespace mfgv
