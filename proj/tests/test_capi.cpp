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

// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mfgv/mfgv.h"

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mfgv_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST_CASE("status names, presets and subcommands") {
  CHECK(std::string(mfgv_status_name(MFGV_OK)) == "ok");
  CHECK(std::string(mfgv_status_name(MFGV_ERR_CHAIN)) == "chain failure");
  CHECK(mfgv_preset_count() >= 4);
  CHECK(mfgv_preset_name(mfgv_preset_count()) == nullptr);
  CHECK(mfgv_subcommand_count() == 8);
  CHECK(std::string(mfgv_subcommand_name(0)) == "solve");
}

TEST_CASE("models and measures") {
  mfgv_model* model = nullptr;
  CHECK(mfgv_model_create("no-such", nullptr, &model) == MFGV_ERR_INVALID_ARGUMENT);
  CHECK(model == nullptr);
  CHECK(std::string(mfgv_last_error()).find("no-such") != std::string::npos);
  CHECK(mfgv_model_create("zero", "{\"bogus\": 1}", &model) == MFGV_ERR_INVALID_ARGUMENT);
  CHECK(mfgv_model_create("zero", "not json", &model) == MFGV_ERR_INVALID_ARGUMENT);
  CHECK(mfgv_model_create(nullptr, nullptr, &model) == MFGV_ERR_NULL);
  REQUIRE(mfgv_model_create("crowd-aversion-1d", nullptr, &model) == MFGV_OK);
  int dim = 0;
  CHECK(mfgv_model_dim(model, &dim) == MFGV_OK);
  CHECK(dim == 1);
  double L = 0, R = 0, c = 0;
  CHECK(mfgv_model_constants(model, &L, &R, &c) == MFGV_OK);
  CHECK(R > 0.0);
  CHECK(c >= R);
  mfgv_model_free(model);
  mfgv_model_free(nullptr);

  const double xa[] = {0.1}, xb[] = {1.8}, w[] = {1.0};
  mfgv_measure *a = nullptr, *b = nullptr;
  REQUIRE(mfgv_measure_create(1, 1, xa, w, &a) == MFGV_OK);
  REQUIRE(mfgv_measure_create(1, 1, xb, w, &b) == MFGV_OK);
  double d = 0.0, td = 0.0;
  CHECK(mfgv_w1(a, b, &d) == MFGV_OK);
  CHECK(mfgv_torus_dist(1, xa, xb, &td) == MFGV_OK);
  CHECK(d == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(d == doctest::Approx(td).epsilon(1e-15));
  const double bad_w[] = {0.5};
  mfgv_measure* bad = nullptr;
  CHECK(mfgv_measure_create(1, 1, xa, bad_w, &bad) == MFGV_ERR_INVALID_ARGUMENT);
  CHECK(mfgv_measure_create(9, 1, xa, w, &bad) == MFGV_ERR_INVALID_ARGUMENT);
  mfgv_measure* j = nullptr;
  REQUIRE(mfgv_measure_from_json("{\"dim\":2,\"atoms\":[{\"x\":[0.1,0.2],\"w\":0.5},{\"x\":[0.3,0.4],\"w\":0.5}]}",
                                 &j) == MFGV_OK);
  size_t n = 0;
  CHECK(mfgv_measure_size(j, &n) == MFGV_OK);
  CHECK(n == 2);
  CHECK(mfgv_w1(a, j, &d) != MFGV_OK);
  mfgv_measure_free(a);
  mfgv_measure_free(b);
  mfgv_measure_free(j);
}

TEST_CASE("solve, verify, save and load through handles") {
  mfgv_model* model = nullptr;
  REQUIRE(mfgv_model_create("zero", nullptr, &model) == MFGV_OK);
  const double x[] = {0.0, 0.25, 0.5}, w[] = {0.2, 0.3, 0.5};
  mfgv_measure* m0 = nullptr;
  REQUIRE(mfgv_measure_create(1, 3, x, w, &m0) == MFGV_OK);
  mfgv_solve_options o;
  mfgv_solve_options_default(&o);
  CHECK(o.lattice_n == 64);
  o.lattice_n = 16;
  o.steps = 8;
  mfgv_solution* sol = nullptr;
  REQUIRE(mfgv_solve(model, 0.0, 1.0, m0, &o, &sol) == MFGV_OK);
  size_t times = 0, nodes = 0;
  double flow = 1.0, gap = 1.0;
  int converged = 0;
  CHECK(mfgv_solution_info(sol, &times, &nodes, &flow, &gap, &converged) == MFGV_OK);
  CHECK(times == 9);
  CHECK(nodes == 16);
  CHECK(converged == 1);
  std::vector<double> v0(nodes), vT(nodes);
  CHECK(mfgv_solution_value(sol, 0, v0.data(), v0.size()) == MFGV_OK);
  CHECK(mfgv_solution_value(sol, 8, vT.data(), vT.size()) == MFGV_OK);
  CHECK(v0 == vT);
  CHECK(mfgv_solution_value(sol, 9, v0.data(), v0.size()) == MFGV_ERR_OUT_OF_RANGE);
  CHECK(mfgv_solution_value(sol, 0, v0.data(), 3) == MFGV_ERR_INVALID_ARGUMENT);
  double t = 0.0;
  CHECK(mfgv_solution_time(sol, 8, &t) == MFGV_OK);
  CHECK(t == 1.0);

  mfgv_report* rep = nullptr;
  REQUIRE(mfgv_verify(model, sol, 1e-9, &rep) == MFGV_OK);
  CHECK(mfgv_report_pass(rep) == 1);
  CHECK(mfgv_report_size(rep) == 5);
  const char* name = nullptr;
  double residual = 1.0, bound = 0.0;
  int pass = 0;
  CHECK(mfgv_report_check(rep, 0, &name, &residual, &bound, &pass) == MFGV_OK);
  CHECK(std::string(name) == "flow_consistency");
  CHECK(residual <= 1e-9);
  CHECK(mfgv_report_check(rep, 5, &name, &residual, &bound, &pass) == MFGV_ERR_OUT_OF_RANGE);
  size_t needed = 0;
  CHECK(mfgv_report_json(rep, nullptr, 0, &needed) == MFGV_OK);
  std::string buf(needed, '\0');
  CHECK(mfgv_report_json(rep, buf.data(), buf.size(), &needed) == MFGV_OK);
  CHECK(buf.find("\"action_gap\"") != std::string::npos);
  mfgv_report_free(rep);

  const fs::path dir = temp_dir("solution");
  CHECK(mfgv_solution_save(sol, dir.string().c_str()) == MFGV_OK);
  mfgv_solution* back = nullptr;
  REQUIRE(mfgv_solution_load(dir.string().c_str(), &back) == MFGV_OK);
  std::vector<double> b0(nodes);
  CHECK(mfgv_solution_value(back, 0, b0.data(), b0.size()) == MFGV_OK);
  CHECK(b0 == v0);
  mfgv_solution* none = nullptr;
  CHECK(mfgv_solution_load("/nonexistent/dir", &none) == MFGV_ERR_INVALID_ARGUMENT);
  mfgv_solution_free(back);
  mfgv_solution_free(sol);
  mfgv_measure_free(m0);
  mfgv_model_free(model);
}

TEST_CASE("scenario runs report exit codes") {
  const fs::path dir = temp_dir("run");
  std::ofstream(dir / "zero.json") << R"({"model": {"preset": "zero"}, "grid": {"n": 16, "steps": 8},
                                         "particles": 4, "out": "unused"})";
  std::ofstream(dir / "bad.json") << R"({"particles": 0})";
  const std::string out = (dir / "out").string();
  mfgv_run_options opts{};
  opts.out = out.c_str();
  opts.seed = 7;
  opts.has_seed = 1;
  opts.threads = 2;
  int code = -1;
  CHECK(mfgv_run("solve", (dir / "zero.json").string().c_str(), &opts, &code) == MFGV_OK);
  CHECK(code == 0);
  CHECK(fs::exists(dir / "out" / "report.json"));
  std::ifstream rep(dir / "out" / "report.json");
  const std::string text((std::istreambuf_iterator<char>(rep)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"seed\": 7") != std::string::npos);

  CHECK(mfgv_run("solve", (dir / "bad.json").string().c_str(), nullptr, &code) == MFGV_OK);
  CHECK(code == 2);
  CHECK(std::string(mfgv_last_error()).find("particles") != std::string::npos);
  CHECK(mfgv_run("nope", (dir / "zero.json").string().c_str(), &opts, &code) == MFGV_OK);
  CHECK(code == 2);
  opts.overrides_json = "[1]";
  CHECK(mfgv_run("solve", (dir / "zero.json").string().c_str(), &opts, &code) == MFGV_ERR_INVALID_ARGUMENT);
  opts.overrides_json = R"({"grid": {"steps": 4}})";
  CHECK(mfgv_run("solve", (dir / "zero.json").string().c_str(), &opts, &code) == MFGV_OK);
  CHECK(code == 0);
  CHECK(mfgv_run("solve", nullptr, &opts, &code) == MFGV_ERR_NULL);
}

}  // namespace
