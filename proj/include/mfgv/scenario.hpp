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

#ifndef MFGV_SCENARIO_HPP_
#define MFGV_SCENARIO_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mfgv/model.hpp"
#include "mfgv/report.hpp"
#include "mfgv/serialize.hpp"

namespace mfgv {

/// Scenario file contents. Input paths (initial measure, stored solution,
/// w1 operands) are relative to the directory of the config file.
struct ScenarioConfig {
  std::string preset = "crowd-aversion-1d";
  ModelParams params;
  int lattice_n = 64;
  int steps = 32;
  double t0 = 0.0, T = 1.0;
  int particles = 64;
  std::string initial = "lattice";  // lattice | random | file
  std::string initial_path;
  double tol_flow = 1e-3;    // fictitious-play flow residual and |gap|
  double tol_verify = 1e-8;  // verify_solution
  double tol_psi = 1e-6;     // Psi-step acceptance and membership radius
  double tol_deriv = 1e-2;   // derivative limits
  double tol_chain = 1e-2;   // chain verification
  std::vector<double> tau_seq;  // empty: 4 dt, 2 dt, dt
  std::uint64_t seed = 1;
  int threads = 0;  // 0: library default
  std::string out = "out";
  std::string solution;  // stored solution directory; empty: solve
  std::vector<std::pair<double, double>> intervals;  // empty: four equal pieces
  std::vector<double> points;                     // empty: ten graph times
  bool fault = true;
  double c = 0.0;  // derivative support radius; 0: model R
  std::vector<int> chain_N = {4, 8, 16};
  int lemma_instances = 50;
  int lemma_action_instances = 200;
  int lemma_necessity_pairs = 20;
  int semigroup_n0 = 32;
  int semigroup_levels = 3;
  bool lemma_chains = false;  // also fit-check chain invariants
  std::string w1_a, w1_b;
  std::string base_dir = ".";  // directory of the config file
};

/// Parses and validates; unknown keys, non-positive tolerances, an empty
/// horizon or a particle count < 1 throw InvalidArgument.
ScenarioConfig parse_config(const Json& j, const std::string& base_dir = ".");
ScenarioConfig load_config(const std::string& path);
/// Canonical document of the effective configuration (sorted keys).
Json config_json(const ScenarioConfig& cfg);
/// FNV-1a 64 of config_json(cfg).dump(), excluding out and threads, as hex.
std::string config_hash(const ScenarioConfig& cfg);

std::vector<std::string> subcommands();

struct RunResult {
  int exit_code = 0;  // 0 pass, 1 failed checks or runtime error, 2 config error
  Report report;
  Json results;
  std::string error;
};

/// Runs one subcommand and writes report.json and CSV tables to cfg.out.
/// report.json: config_hash, subcommand, pass, checks, timings, tolerances,
/// results, timestamp; only timings and timestamp vary between identical
/// runs.
RunResult run_scenario(const std::string& subcommand, const ScenarioConfig& cfg);

/// load_config + JSON merge patch `overrides` + run_scenario; config
/// errors give exit code 2 with the message in `error`.
RunResult run_from_file(const std::string& subcommand, const std::string& config_path,
                        const Json& overrides = Json::object());

}  // namespace mfgv

#endif  // MFGV_SCENARIO_HPP_
