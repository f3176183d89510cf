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

// mfgv <subcommand> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "mfgv/mfgv.h"

namespace {

std::string describe(const std::string& sub) {
  if (sub == "solve") return "Solve the equilibrium and verify it";
  if (sub == "verify") return "Verify a stored (or freshly solved) equilibrium";
  if (sub == "psi") return "Check restricted, generated, composed and split game-dynamics steps";
  if (sub == "viability") return "Check viability of the equilibrium value multifunction";
  if (sub == "derivative") return "Search derivative witnesses at graph points, with a fault probe";
  if (sub == "chain") return "Build Euler chains for several N and check convergence";
  if (sub == "lemmas") return "Run the property suite of the propagator estimates";
  if (sub == "w1") return "Wasserstein-1 distance and optimal plan between two measure files";
  return "";
}

// MFG_THREADS, when set, must be a positive integer.
bool env_threads(int* threads) {
  const char* v = std::getenv("MFG_THREADS");
  if (v == nullptr || *v == '\0') return true;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096) return false;
  *threads = static_cast<int>(n);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field game solver and property checks on the torus", "mfgv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mfgv_version()));

  std::string config, out;
  std::uint64_t seed = 0;
  int threads = 0;
  for (std::size_t i = 0; i < mfgv_subcommand_count(); ++i) {
    CLI::App* sub = app.add_subcommand(mfgv_subcommand_name(i), describe(mfgv_subcommand_name(i)));
    sub->add_option("--config", config, "Scenario file (JSON)")->required();
    sub->add_option("--out", out, "Output directory (overrides the config)");
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    sub->add_option("--threads", threads, "Worker threads (overrides the config and MFG_THREADS)")
        ->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const CLI::App* sub = app.get_subcommands().front();

  mfgv_run_options opts{};
  opts.out = out.empty() ? nullptr : out.c_str();
  opts.has_seed = sub->count("--seed") > 0;
  opts.seed = seed;
  opts.threads = threads;
  if (sub->count("--threads") == 0 && !env_threads(&opts.threads)) {
    std::fprintf(stderr, "mfgv: MFG_THREADS must be a positive integer\n");
    return 2;
  }

  int exit_code = 2;
  const mfgv_status st = mfgv_run(sub->get_name().c_str(), config.c_str(), &opts, &exit_code);
  if (st != MFGV_OK) {
    std::fprintf(stderr, "mfgv: %s: %s\n", mfgv_status_name(st), mfgv_last_error());
    return 2;
  }
  const char* err = mfgv_last_error();
  if (exit_code == 2) std::fprintf(stderr, "mfgv: config error: %s\n", err);
  else if (*err != '\0') std::fprintf(stderr, "mfgv: error: %s\n", err);
  std::printf("%s: %s\n", sub->get_name().c_str(), exit_code == 0 ? "pass" : exit_code == 1 ? "fail" : "error");
  return exit_code;
}
