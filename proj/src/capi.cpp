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

#include "mfgv/mfgv.h"

#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "mfgv/error.hpp"
#include "mfgv/mfg.hpp"
#include "mfgv/model.hpp"
#include "mfgv/scenario.hpp"
#include "mfgv/serialize.hpp"
#include "mfgv/wasserstein.hpp"

struct mfgv_model {
  mfgv::ModelSpec spec;
};
struct mfgv_measure {
  mfgv::DiscreteMeasure m;
};
struct mfgv_solution {
  mfgv::MFGSolution sol;
};
struct mfgv_report {
  mfgv::Report rep;
};

namespace {

thread_local std::string last_error;

mfgv_status fail(mfgv_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

mfgv_status from_code(mfgv::ErrorCode c) {
  switch (c) {
    case mfgv::ErrorCode::kInvalidArgument: return MFGV_ERR_INVALID_ARGUMENT;
    case mfgv::ErrorCode::kOutOfRange: return MFGV_ERR_OUT_OF_RANGE;
    case mfgv::ErrorCode::kPreconditionViolation: return MFGV_ERR_PRECONDITION;
    case mfgv::ErrorCode::kConvergenceFailure: return MFGV_ERR_CONVERGENCE;
    case mfgv::ErrorCode::kChainFailure: return MFGV_ERR_CHAIN;
  }
  return MFGV_ERR_INTERNAL;
}

// Runs f, translating exceptions into status codes.
template <class F>
mfgv_status guarded(F&& f) {
  try {
    f();
    return MFGV_OK;
  } catch (const mfgv::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(MFGV_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(MFGV_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MFGV_ERR_INTERNAL, "unknown exception");
  }
}

#define MFGV_REQUIRE(ptr) \
  if ((ptr) == nullptr) return fail(MFGV_ERR_NULL, std::string(__func__) + ": " #ptr " is NULL")

const std::vector<std::string>& presets() {
  static const std::vector<std::string> p = mfgv::model_presets();
  return p;
}

const std::vector<std::string>& subs() {
  static const std::vector<std::string> s = mfgv::subcommands();
  return s;
}

}  // namespace

extern "C" {

const char* mfgv_version(void) { return "0.1.0"; }

const char* mfgv_status_name(mfgv_status status) {
  switch (status) {
    case MFGV_OK: return "ok";
    case MFGV_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MFGV_ERR_OUT_OF_RANGE: return "out of range";
    case MFGV_ERR_PRECONDITION: return "precondition violation";
    case MFGV_ERR_CONVERGENCE: return "convergence failure";
    case MFGV_ERR_CHAIN: return "chain failure";
    case MFGV_ERR_NULL: return "null argument";
    case MFGV_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mfgv_last_error(void) { return last_error.c_str(); }

// -- models ------------------------------------------------------------------------

size_t mfgv_preset_count(void) { return presets().size(); }

const char* mfgv_preset_name(size_t i) { return i < presets().size() ? presets()[i].c_str() : nullptr; }

mfgv_status mfgv_model_create(const char* preset, const char* params_json, mfgv_model** out) {
  MFGV_REQUIRE(preset);
  MFGV_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    mfgv::ModelParams params;
    if (params_json != nullptr) {
      const mfgv::Json j = mfgv::Json::parse(params_json);
      if (!j.is_object()) throw mfgv::InvalidArgument("params_json must be an object");
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it->is_number()) throw mfgv::InvalidArgument("parameter '" + it.key() + "' is not a number");
        params[it.key()] = it->get<double>();
      }
    }
    auto m = std::make_unique<mfgv_model>();
    m->spec = mfgv::make_model(preset, params);
    *out = m.release();
  });
}

void mfgv_model_free(mfgv_model* model) { delete model; }

mfgv_status mfgv_model_dim(const mfgv_model* model, int* dim) {
  MFGV_REQUIRE(model);
  MFGV_REQUIRE(dim);
  *dim = model->spec.dim;
  return MFGV_OK;
}

mfgv_status mfgv_model_constants(const mfgv_model* model, double* L, double* R, double* c) {
  MFGV_REQUIRE(model);
  if (L) *L = model->spec.L;
  if (R) *R = model->spec.R;
  if (c) *c = model->spec.c;
  return MFGV_OK;
}

// -- measures ----------------------------------------------------------------------

mfgv_status mfgv_measure_create(int dim, size_t n, const double* coords, const double* weights,
                                mfgv_measure** out) {
  MFGV_REQUIRE(coords);
  MFGV_REQUIRE(weights);
  MFGV_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    if (dim < 1 || dim > static_cast<int>(mfgv::kMaxDim)) throw mfgv::InvalidArgument("unsupported dimension");
    auto m = std::make_unique<mfgv_measure>();
    for (size_t i = 0; i < n; ++i)
      m->m.atoms.push_back(
          {mfgv::wrap(std::span<const double>(coords + i * static_cast<size_t>(dim), static_cast<size_t>(dim))),
           weights[i]});
    mfgv::validate(m->m);
    *out = m.release();
  });
}

mfgv_status mfgv_measure_from_json(const char* json, mfgv_measure** out) {
  MFGV_REQUIRE(json);
  MFGV_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto m = std::make_unique<mfgv_measure>();
    m->m = mfgv::measure_from_json(mfgv::Json::parse(json));
    *out = m.release();
  });
}

void mfgv_measure_free(mfgv_measure* m) { delete m; }

mfgv_status mfgv_measure_size(const mfgv_measure* m, size_t* n) {
  MFGV_REQUIRE(m);
  MFGV_REQUIRE(n);
  *n = m->m.size();
  return MFGV_OK;
}

mfgv_status mfgv_w1(const mfgv_measure* a, const mfgv_measure* b, double* distance) {
  MFGV_REQUIRE(a);
  MFGV_REQUIRE(b);
  MFGV_REQUIRE(distance);
  return guarded([&] { *distance = mfgv::w1(a->m, b->m).distance; });
}

mfgv_status mfgv_torus_dist(int dim, const double* x, const double* y, double* distance) {
  MFGV_REQUIRE(x);
  MFGV_REQUIRE(y);
  MFGV_REQUIRE(distance);
  return guarded([&] {
    if (dim < 1) throw mfgv::InvalidArgument("dimension must be >= 1");
    const auto d = static_cast<size_t>(dim);
    *distance = mfgv::torus_dist(mfgv::wrap({x, d}), mfgv::wrap({y, d}));
  });
}

// -- equilibria --------------------------------------------------------------------

void mfgv_solve_options_default(mfgv_solve_options* options) {
  if (options == nullptr) return;
  const mfgv::MfgOptions o;
  options->lattice_n = o.lattice_n;
  options->steps = o.steps;
  options->tol = o.tol;
  options->max_iter = o.max_iter;
}

mfgv_status mfgv_solve(const mfgv_model* model, double t0, double T, const mfgv_measure* m0,
                       const mfgv_solve_options* options, mfgv_solution** out) {
  MFGV_REQUIRE(model);
  MFGV_REQUIRE(m0);
  MFGV_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    mfgv::MfgOptions o;
    if (options != nullptr) {
      o.lattice_n = options->lattice_n;
      o.steps = options->steps;
      o.tol = options->tol;
      o.max_iter = options->max_iter;
    }
    auto s = std::make_unique<mfgv_solution>();
    s->sol = mfgv::solve_mfg(model->spec, t0, T, m0->m, o);
    *out = s.release();
  });
}

mfgv_status mfgv_solution_load(const char* dir, mfgv_solution** out) {
  MFGV_REQUIRE(dir);
  MFGV_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<mfgv_solution>();
    s->sol = mfgv::load_solution(dir);
    *out = s.release();
  });
}

mfgv_status mfgv_solution_save(const mfgv_solution* sol, const char* dir) {
  MFGV_REQUIRE(sol);
  MFGV_REQUIRE(dir);
  return guarded([&] { mfgv::save_solution(sol->sol, dir); });
}

void mfgv_solution_free(mfgv_solution* sol) { delete sol; }

mfgv_status mfgv_solution_info(const mfgv_solution* sol, size_t* num_times, size_t* num_nodes,
                               double* flow_residual, double* gap, int* converged) {
  MFGV_REQUIRE(sol);
  if (num_times) *num_times = sol->sol.times.size();
  if (num_nodes) *num_nodes = sol->sol.V.empty() ? 0 : sol->sol.V.front().size();
  if (flow_residual) *flow_residual = sol->sol.residuals.flow;
  if (gap) *gap = sol->sol.residuals.gap;
  if (converged) *converged = sol->sol.residuals.converged ? 1 : 0;
  return MFGV_OK;
}

mfgv_status mfgv_solution_value(const mfgv_solution* sol, size_t k, double* values, size_t capacity) {
  MFGV_REQUIRE(sol);
  MFGV_REQUIRE(values);
  if (k >= sol->sol.V.size()) return fail(MFGV_ERR_OUT_OF_RANGE, "mfgv_solution_value: time index out of range");
  const auto& v = sol->sol.V[k].values();
  if (capacity < v.size()) return fail(MFGV_ERR_INVALID_ARGUMENT, "mfgv_solution_value: buffer too small");
  std::copy(v.begin(), v.end(), values);
  return MFGV_OK;
}

mfgv_status mfgv_solution_time(const mfgv_solution* sol, size_t k, double* t) {
  MFGV_REQUIRE(sol);
  MFGV_REQUIRE(t);
  if (k >= sol->sol.times.size()) return fail(MFGV_ERR_OUT_OF_RANGE, "mfgv_solution_time: index out of range");
  *t = sol->sol.times[k];
  return MFGV_OK;
}

// -- reports -----------------------------------------------------------------------

mfgv_status mfgv_verify(const mfgv_model* model, const mfgv_solution* sol, double tol, mfgv_report** out) {
  MFGV_REQUIRE(model);
  MFGV_REQUIRE(sol);
  MFGV_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto r = std::make_unique<mfgv_report>();
    r->rep = mfgv::verify_solution(model->spec, sol->sol, tol);
    *out = r.release();
  });
}

void mfgv_report_free(mfgv_report* report) { delete report; }

size_t mfgv_report_size(const mfgv_report* report) { return report ? report->rep.checks.size() : 0; }

int mfgv_report_pass(const mfgv_report* report) { return report && report->rep.pass() ? 1 : 0; }

mfgv_status mfgv_report_check(const mfgv_report* report, size_t i, const char** name, double* residual,
                              double* bound, int* pass) {
  MFGV_REQUIRE(report);
  if (i >= report->rep.checks.size()) return fail(MFGV_ERR_OUT_OF_RANGE, "mfgv_report_check: index out of range");
  const mfgv::Check& c = report->rep.checks[i];
  if (name) *name = c.name.c_str();
  if (residual) *residual = c.residual;
  if (bound) *bound = c.bound;
  if (pass) *pass = c.pass ? 1 : 0;
  return MFGV_OK;
}

mfgv_status mfgv_report_json(const mfgv_report* report, char* buffer, size_t capacity, size_t* needed) {
  MFGV_REQUIRE(report);
  MFGV_REQUIRE(needed);
  return guarded([&] {
    const std::string s = mfgv::to_json(report->rep).dump();
    *needed = s.size() + 1;
    if (buffer != nullptr && capacity >= s.size() + 1) std::memcpy(buffer, s.c_str(), s.size() + 1);
  });
}

// -- scenarios ---------------------------------------------------------------------

size_t mfgv_subcommand_count(void) { return subs().size(); }

const char* mfgv_subcommand_name(size_t i) { return i < subs().size() ? subs()[i].c_str() : nullptr; }

mfgv_status mfgv_run(const char* subcommand, const char* config_path, const mfgv_run_options* options,
                     int* exit_code) {
  MFGV_REQUIRE(subcommand);
  MFGV_REQUIRE(config_path);
  MFGV_REQUIRE(exit_code);
  *exit_code = 2;
  last_error.clear();
  return guarded([&] {
    mfgv::Json patch = mfgv::Json::object();
    if (options != nullptr) {
      if (options->overrides_json != nullptr) {
        patch = mfgv::Json::parse(options->overrides_json);
        if (!patch.is_object()) throw mfgv::InvalidArgument("overrides_json must be an object");
      }
      if (options->out != nullptr) patch["out"] = options->out;
      if (options->has_seed) patch["seed"] = options->seed;
      if (options->threads > 0) patch["threads"] = options->threads;
    }
    const mfgv::RunResult r = mfgv::run_from_file(subcommand, config_path, patch);
    *exit_code = r.exit_code;
    if (!r.error.empty()) last_error = r.error;
  });
}

}  // extern "C"
