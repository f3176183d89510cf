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

#include "mfgv/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "mfgv/error.hpp"

namespace mfgv {
namespace {

namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double get_number(const Json& j) { return j.is_null() ? kNaN : j.get<double>(); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidArgument(std::string("json: missing field '") + key + "'");
  }
  return j.at(key);
}

Json point_json(const TorusPoint& x) {
  Json a = Json::array();
  for (int d = 0; d < x.dim; ++d) a.push_back(x[d]);
  return a;
}

TorusPoint point_from(const Json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw InvalidArgument("json: point has the wrong dimension");
  }
  std::vector<double> v;
  for (const auto& e : j) v.push_back(e.get<double>());
  return wrap(v);
}

int dim_of(const Json& j) {
  const int d = field(j, "dim").get<int>();
  if (d < 1 || d > kMaxDim) throw InvalidArgument("json: unsupported dimension");
  return d;
}

Json flow_json(const Flow& flow) {
  Json slices = Json::array();
  for (std::size_t k = 0; k < flow.size(); ++k) slices.push_back(to_json(flow.extended(k)));
  return {{"time_grid", flow.times()}, {"slices", slices}};
}

Flow flow_from(const Json& j) {
  std::vector<ExtendedMeasure> slices;
  for (const auto& s : field(j, "slices")) slices.push_back(extended_from_json(s));
  return Flow(field(j, "time_grid").get<std::vector<double>>(), std::move(slices));
}

Json control_json(const RelaxedControl& c) { return c.weights; }

template <class F>
auto decode(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("json: malformed ") + what + ": " + e.what());
  }
}

std::string frame_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "V_%04zu.json", k);
  return buf;
}

}  // namespace

Json to_json(const DiscreteMeasure& m) {
  Json atoms = Json::array();
  for (const auto& a : m.atoms) atoms.push_back({{"x", point_json(a.point)}, {"w", a.weight}});
  return {{"dim", m.empty() ? 1 : measure_dim(m)}, {"atoms", atoms}};
}

Json to_json(const ExtendedMeasure& nu) {
  Json atoms = Json::array();
  for (const auto& a : nu.atoms) {
    atoms.push_back({{"x", point_json(a.point.x)}, {"z", a.point.z}, {"w", a.weight}});
  }
  return {{"dim", nu.empty() ? 1 : measure_dim(nu)}, {"atoms", atoms}};
}

Json to_json(const PathMeasure& chi) {
  Json atoms = Json::array();
  int dim = 1;
  for (const auto& a : chi.atoms) {
    Json states = Json::array();
    for (const auto& p : a.point) {
      states.push_back({{"x", point_json(p.x)}, {"z", p.z}});
      dim = p.x.dim;
    }
    atoms.push_back({{"w", a.weight}, {"states", states}});
  }
  return {{"dim", dim}, {"time_grid", chi.times}, {"atoms", atoms}};
}

Json to_json(const GridFunction& phi) {
  return {{"n", phi.n()}, {"dim", phi.dim()}, {"values", phi.values()}};
}

Json to_json(const Report& report) {
  Json out = Json::array();
  for (const auto& c : report.checks) {
    out.push_back({{"name", c.name},
                   {"residual", number(c.residual)},
                   {"bound", number(c.bound)},
                   {"lower", c.lower},
                   {"pass", c.pass}});
  }
  return out;
}

DiscreteMeasure measure_from_json(const Json& j) {
  return decode("measure", [&] {
    const int dim = dim_of(j);
    DiscreteMeasure m;
    for (const auto& a : field(j, "atoms")) {
      m.atoms.push_back({point_from(field(a, "x"), dim), field(a, "w").get<double>()});
    }
    validate(m);
    return m;
  });
}

ExtendedMeasure extended_from_json(const Json& j) {
  return decode("extended measure", [&] {
    const int dim = dim_of(j);
    ExtendedMeasure nu;
    for (const auto& a : field(j, "atoms")) {
      const double z = a.contains("z") ? a.at("z").get<double>() : 0.0;
      nu.atoms.push_back({{point_from(field(a, "x"), dim), z}, field(a, "w").get<double>()});
    }
    validate(nu);
    return nu;
  });
}

PathMeasure paths_from_json(const Json& j) {
  return decode("path measure", [&] {
    const int dim = dim_of(j);
    PathMeasure chi;
    chi.times = field(j, "time_grid").get<std::vector<double>>();
    for (const auto& a : field(j, "atoms")) {
      Trajectory path;
      for (const auto& s : field(a, "states")) {
        path.push_back({point_from(field(s, "x"), dim), field(s, "z").get<double>()});
      }
      chi.atoms.push_back({std::move(path), field(a, "w").get<double>()});
    }
    validate(chi);
    return chi;
  });
}

GridFunction grid_from_json(const Json& j) {
  return decode("grid function", [&] {
    const TorusLattice lat(dim_of(j), field(j, "n").get<int>());
    std::vector<double> v = field(j, "values").get<std::vector<double>>();
    if (v.size() != lat.size()) throw InvalidArgument("json: grid function has the wrong size");
    return GridFunction(lat, std::move(v));
  });
}

Report report_from_json(const Json& j) {
  return decode("report", [&] {
    Report rep;
    for (const auto& c : j) {
      Check k;
      k.name = field(c, "name").get<std::string>();
      k.residual = get_number(field(c, "residual"));
      k.bound = get_number(field(c, "bound"));
      k.lower = c.value("lower", false);
      k.pass = field(c, "pass").get<bool>();
      rep.add(std::move(k));
    }
    return rep;
  });
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot write '" + path + "'");
  f << j.dump(2) << '\n';
  if (!f) throw InvalidArgument("cannot write '" + path + "'");
}

Json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot read '" + path + "'");
  try {
    return Json::parse(f);
  } catch (const Json::exception& e) {
    throw InvalidArgument("'" + path + "': " + e.what());
  }
}

void save_solution(const MFGSolution& sol, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  Json profile = Json::array();
  for (const auto& s : sol.profile) {
    profile.push_back({{"atom", s.atom}, {"weight", s.weight}, {"control", control_json(s.control)}});
  }
  const MfgResiduals& r = sol.residuals;
  Json frames = Json::array();
  for (std::size_t k = 0; k < sol.V.size(); ++k) {
    frames.push_back(frame_name(k));
    write_json((base / frame_name(k)).string(), to_json(sol.V[k]));
  }
  Json meta = {
      {"time_grid", sol.times},
      {"m0", to_json(sol.m0)},
      {"m_flow", Json::array()},
      {"profile", profile},
      {"fixed_terminal", sol.fixed_terminal ? to_json(*sol.fixed_terminal) : Json(nullptr)},
      {"residuals",
       {{"flow", number(r.flow)},
        {"refine_shift", number(r.refine_shift)},
        {"max_regret", number(r.max_regret)},
        {"gap", number(r.gap)},
        {"iterations", r.iterations},
        {"refinements", r.refinements},
        {"converged", r.converged},
        {"history", r.history}}},
      {"V", frames},
      {"flow", "flow.json"},
      {"paths", "paths.json"}};
  for (const auto& m : sol.m_flow) meta["m_flow"].push_back(to_json(m));
  write_json((base / "solution.json").string(), meta);
  write_json((base / "flow.json").string(), flow_json(sol.nu_flow));
  write_json((base / "paths.json").string(), to_json(sol.chi));
}

MFGSolution load_solution(const std::string& dir) {
  const fs::path base(dir);
  const Json meta = read_json((base / "solution.json").string());
  return decode("solution", [&] {
    MFGSolution sol;
    sol.times = field(meta, "time_grid").get<std::vector<double>>();
    sol.m0 = measure_from_json(field(meta, "m0"));
    for (const auto& m : field(meta, "m_flow")) sol.m_flow.push_back(measure_from_json(m));
    for (const auto& p : field(meta, "profile")) {
      Strategy s;
      s.atom = field(p, "atom").get<std::size_t>();
      s.weight = field(p, "weight").get<double>();
      s.control.weights = field(p, "control").get<std::vector<std::vector<double>>>();
      sol.profile.push_back(std::move(s));
    }
    if (!field(meta, "fixed_terminal").is_null()) {
      sol.fixed_terminal = grid_from_json(meta.at("fixed_terminal"));
    }
    const Json& r = field(meta, "residuals");
    sol.residuals.flow = get_number(field(r, "flow"));
    sol.residuals.refine_shift = get_number(field(r, "refine_shift"));
    sol.residuals.max_regret = get_number(field(r, "max_regret"));
    sol.residuals.gap = get_number(field(r, "gap"));
    sol.residuals.iterations = field(r, "iterations").get<int>();
    sol.residuals.refinements = field(r, "refinements").get<int>();
    sol.residuals.converged = field(r, "converged").get<bool>();
    for (const auto& h : field(r, "history")) sol.residuals.history.push_back(get_number(h));
    for (const auto& f : field(meta, "V")) {
      sol.V.push_back(grid_from_json(read_json((base / f.get<std::string>()).string())));
    }
    sol.nu_flow = flow_from(read_json((base / field(meta, "flow").get<std::string>()).string()));
    sol.chi = paths_from_json(read_json((base / field(meta, "paths").get<std::string>()).string()));
    if (sol.V.size() != sol.times.size() || sol.m_flow.size() != sol.times.size() ||
        sol.nu_flow.size() != sol.times.size()) {
      throw InvalidArgument("solution: inconsistent number of grid times");
    }
    return sol;
  });
}

void save_step(const PsiStep& step, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  const Json meta = {{"s", step.s},
                     {"r", step.r},
                     {"m", to_json(step.m)},
                     {"mu", to_json(step.mu)},
                     {"phi", to_json(step.phi)},
                     {"psi", to_json(step.psi)},
                     {"psi_residuals", to_json(step.residuals)},
                     {"flow", "flow.json"},
                     {"paths", "paths.json"}};
  write_json((base / "step.json").string(), meta);
  write_json((base / "flow.json").string(), flow_json(step.nu_flow));
  write_json((base / "paths.json").string(), to_json(step.chi));
}

PsiStep load_step(const std::string& dir) {
  const fs::path base(dir);
  const Json meta = read_json((base / "step.json").string());
  return decode("step", [&] {
    PsiStep st;
    st.s = field(meta, "s").get<double>();
    st.r = field(meta, "r").get<double>();
    st.m = measure_from_json(field(meta, "m"));
    st.mu = measure_from_json(field(meta, "mu"));
    st.phi = grid_from_json(field(meta, "phi"));
    st.psi = grid_from_json(field(meta, "psi"));
    st.residuals = report_from_json(field(meta, "psi_residuals"));
    st.nu_flow = flow_from(read_json((base / field(meta, "flow").get<std::string>()).string()));
    st.chi = paths_from_json(read_json((base / field(meta, "paths").get<std::string>()).string()));
    return st;
  });
}

}  // namespace mfgv
