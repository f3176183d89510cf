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

#ifndef MFGV_SERIALIZE_HPP_
#define MFGV_SERIALIZE_HPP_

#include <string>

#include "json.hpp"
#include "mfgv/gamedyn.hpp"
#include "mfgv/grid_function.hpp"
#include "mfgv/measures.hpp"
#include "mfgv/mfg.hpp"
#include "mfgv/report.hpp"

namespace mfgv {

using Json = nlohmann::json;

// Measures: {"dim": d, "atoms": [{"x": [...], "z": z, "w": w}]}, with "z"
// only on extended measures. Path measures: {"dim", "time_grid",
// "atoms": [{"w": w, "states": [{"x": [...], "z": z}, ...]}]}.
// Grid functions: {"n": n, "dim": d, "values": [...]} in row-major order.
// Decoders throw InvalidArgument on malformed documents and validate the
// decoded object.
Json to_json(const DiscreteMeasure& m);
Json to_json(const ExtendedMeasure& nu);
Json to_json(const PathMeasure& chi);
Json to_json(const GridFunction& phi);
/// [{"name", "residual", "bound", "pass"}]; non-finite residuals are null.
Json to_json(const Report& report);

DiscreteMeasure measure_from_json(const Json& j);
ExtendedMeasure extended_from_json(const Json& j);
PathMeasure paths_from_json(const Json& j);
GridFunction grid_from_json(const Json& j);
Report report_from_json(const Json& j);

/// Pretty-printed with round-trip precision; InvalidArgument on I/O errors.
void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

/// Directory with solution.json (metadata, m0, profile, residuals),
/// V_<k>.json per grid time, flow.json and paths.json. Creates `dir`.
void save_solution(const MFGSolution& sol, const std::string& dir);
MFGSolution load_solution(const std::string& dir);

/// Same layout with step.json (s, r, m, mu, phi, psi, "psi_residuals").
void save_step(const PsiStep& step, const std::string& dir);
PsiStep load_step(const std::string& dir);

}  // namespace mfgv

#endif  // MFGV_SERIALIZE_HPP_
