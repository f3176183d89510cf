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

#ifndef MFGV_MODEL_HPP_
#define MFGV_MODEL_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mfgv/measures.hpp"
#include "mfgv/torus.hpp"

namespace mfgv {

/// Finite summary of a measure through which a model sees the population.
/// Presets store low-order Fourier moments here, which keeps every
/// evaluation of f, g and sigma O(1) once the summary is known.
using Stats = std::array<double, 4>;

/// A deterministic mean-field control model on T^d with finite control set.
struct ModelSpec {
  std::string name;
  int dim = 1;
  std::vector<Coords> controls;

  std::function<Stats(const DiscreteMeasure&)> summarize;
  std::function<Coords(double t, const TorusPoint& x, const Stats& m, const Coords& u)> f;
  std::function<double(double t, const TorusPoint& x, const Stats& m, const Coords& u)> g;
  std::function<double(const TorusPoint& x, const Stats& m)> sigma;

  double L = 0.0;      // Lipschitz constant of f and g in (x, m)
  double kappa = 0.0;  // Lipschitz constant of sigma in x
  double L_t = 0.0;    // time modulus alpha(d) = L_t |d|
  double R = 0.0;      // bound on |f| and |g|
  double c = 0.0;      // velocity radius of admissible plans
  int mesh = 5;        // barycentric subdivisions of the control simplex
  bool f_depends_on_m = true;  // false: motion ignores the population

  double alpha(double delta) const;
  std::size_t num_controls() const { return controls.size(); }
};

using ModelParams = std::map<std::string, double>;

/// Names accepted by make_model.
std::vector<std::string> model_presets();

/// Builds a registered preset. Unknown names or parameters throw
/// InvalidArgument.
ModelSpec make_model(const std::string& preset, const ModelParams& params = {});

/// Samples |f|, |g| and Lipschitz ratios at random probes. Throws
/// InvalidArgument if R, L or kappa is violated beyond 5% or if c < R.
struct ModelAudit {
  double sup_f = 0.0, sup_g = 0.0;
  double lip_fg = 0.0, lip_sigma = 0.0, lip_t = 0.0;
};
ModelAudit validate_model(const ModelSpec& model, std::uint64_t seed = 1,
                          int probes = 400);

/// Barycentric grid on the probability simplex over the controls: all weight
/// vectors with entries k/M. Pure controls come first (in control order),
/// then the remaining points in lexicographic order.
std::vector<std::vector<double>> mixture_mesh(std::size_t num_controls, int subdivisions);

/// (f, g)(t, x, m, u_k) for every control.
std::vector<Velocity> control_extremes(const ModelSpec& model, double t,
                                       const TorusPoint& x, const Stats& m);

/// sum_k weights_k (f, g)(u_k).
Velocity mix(const std::vector<Velocity>& extremes, const std::vector<double>& weights);

/// Summaries for every slice of a flow.
std::vector<Stats> summarize_flow(const ModelSpec& model, const Flow& flow);

}  // namespace mfgv

#endif  // MFGV_MODEL_HPP_
