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

#include "mfgv/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mfgv/error.hpp"
#include "mfgv/wasserstein.hpp"

namespace mfgv {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

ModelParams with_defaults(const std::string& preset, const ModelParams& given,
                          const ModelParams& defaults) {
  ModelParams p = defaults;
  for (const auto& [k, v] : given) {
    if (!defaults.count(k)) {
      throw InvalidArgument("model '" + preset + "': unknown parameter '" + k + "'");
    }
    if (!std::isfinite(v)) {
      throw InvalidArgument("model '" + preset + "': parameter '" + k + "' not finite");
    }
    p[k] = v;
  }
  return p;
}

// First Fourier moments (C, S) of each axis: sum w cos 2 pi x_i, sum w sin 2 pi x_i.
Stats fourier_moments(const DiscreteMeasure& m) {
  Stats s{};
  for (const auto& a : m.atoms) {
    for (int i = 0; i < a.point.dim; ++i) {
      s[static_cast<std::size_t>(2 * i)] += a.weight * std::cos(kTwoPi * a.point[i]);
      s[static_cast<std::size_t>(2 * i + 1)] += a.weight * std::sin(kTwoPi * a.point[i]);
    }
  }
  return s;
}

Stats no_stats(const DiscreteMeasure&) { return Stats{}; }

// (k * m)(x) for k(d) = (1 + cos 2 pi d) / 2 on T^1.
double crowd_density(double x, const Stats& m) {
  return 0.5 + 0.5 * (std::cos(kTwoPi * x) * m[0] + std::sin(kTwoPi * x) * m[1]);
}

std::vector<Coords> speeds_1d(double v) { return {Coords{-v, 0.0}, Coords{v, 0.0}}; }

ModelSpec zero_model(const ModelParams& given) {
  const ModelParams p = with_defaults("zero", given, {{"dim", 1}, {"amp", 1.0}});
  const int dim = static_cast<int>(p.at("dim"));
  if (dim != 1 && dim != 2) throw InvalidArgument("model 'zero': dim must be 1 or 2");
  const double amp = p.at("amp");
  ModelSpec m;
  m.name = "zero";
  m.dim = dim;
  m.controls = {Coords{0.0, 0.0}};
  m.summarize = no_stats;
  m.f = [](double, const TorusPoint&, const Stats&, const Coords&) { return Coords{}; };
  m.g = [](double, const TorusPoint&, const Stats&, const Coords&) { return 0.0; };
  if (dim == 1) {
    m.sigma = [amp](const TorusPoint& x, const Stats&) { return amp * std::cos(kTwoPi * x[0]); };
  } else {
    m.sigma = [amp](const TorusPoint& x, const Stats&) {
      return amp * std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
    };
  }
  m.kappa = kTwoPi * std::fabs(amp);
  m.mesh = 1;
  m.f_depends_on_m = false;
  return m;
}

ModelSpec reward_model(const ModelParams& given) {
  const ModelParams p = with_defaults("reward", given, {{"rate", 1.0}, {"amp", 1.0}});
  const double rate = p.at("rate"), amp = p.at("amp");
  ModelSpec m;
  m.name = "reward";
  m.controls = {Coords{0.0, 0.0}};
  m.summarize = no_stats;
  m.f = [](double, const TorusPoint&, const Stats&, const Coords&) { return Coords{}; };
  m.g = [rate](double, const TorusPoint&, const Stats&, const Coords&) { return rate; };
  m.sigma = [amp](const TorusPoint& x, const Stats&) { return amp * std::cos(kTwoPi * x[0]); };
  m.kappa = kTwoPi * std::fabs(amp);
  m.R = m.c = std::fabs(rate);
  m.mesh = 1;
  m.f_depends_on_m = false;
  return m;
}

// Pure control problem: speed-limited motion with a position-dependent cost.
ModelSpec drift_model(const ModelParams& given) {
  const ModelParams p = with_defaults(
      "drift-1d", given,
      {{"speed", 1.0}, {"beta", 0.5}, {"x0", 0.25}, {"amp", 1.0}, {"x1", 0.0}});
  const double v = p.at("speed"), beta = p.at("beta"), x0 = p.at("x0");
  const double amp = p.at("amp"), x1 = p.at("x1");
  ModelSpec m;
  m.name = "drift-1d";
  m.controls = speeds_1d(v);
  m.summarize = no_stats;
  m.f = [](double, const TorusPoint&, const Stats&, const Coords& u) { return u; };
  m.g = [beta, x0](double, const TorusPoint& x, const Stats&, const Coords&) {
    return -0.5 * beta * (1.0 - std::cos(kTwoPi * (x[0] - x0)));
  };
  m.sigma = [amp, x1](const TorusPoint& x, const Stats&) {
    return amp * std::cos(kTwoPi * (x[0] - x1));
  };
  m.L = kPi * std::fabs(beta);
  m.kappa = kTwoPi * std::fabs(amp);
  m.R = m.c = std::max(std::fabs(v), std::fabs(beta));
  m.f_depends_on_m = false;
  return m;
}

ModelSpec drift2d_model(const ModelParams& given) {
  const ModelParams p = with_defaults("drift-2d", given, {{"speed", 1.0}, {"beta", 0.5}, {"amp", 1.0}});
  const double v = p.at("speed"), beta = p.at("beta"), amp = p.at("amp");
  ModelSpec m;
  m.name = "drift-2d";
  m.dim = 2;
  m.controls = {Coords{v, 0.0}, Coords{-v, 0.0}, Coords{0.0, v}, Coords{0.0, -v}};
  m.summarize = no_stats;
  m.f = [](double, const TorusPoint&, const Stats&, const Coords& u) { return u; };
  m.g = [beta](double, const TorusPoint& x, const Stats&, const Coords&) {
    return -0.25 * beta * (2.0 - std::cos(kTwoPi * x[0]) - std::cos(kTwoPi * x[1]));
  };
  m.sigma = [amp](const TorusPoint& x, const Stats&) {
    return amp * std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
  };
  m.L = kPi * std::fabs(beta) / std::sqrt(2.0);
  m.kappa = kTwoPi * std::fabs(amp);
  m.R = m.c = std::max(std::fabs(v), std::fabs(beta));
  m.mesh = 2;
  m.f_depends_on_m = false;
  return m;
}

// Running cost proportional to the locally smoothed density, with a
// time-periodic intensity.
ModelSpec crowd_model(const ModelParams& given) {
  const ModelParams p = with_defaults(
      "crowd-aversion-1d", given,
      {{"speed", 1.0}, {"lambda", 0.5}, {"eps", 0.5}, {"amp", 0.5}, {"x0", 0.0}});
  const double v = p.at("speed"), lam = p.at("lambda"), eps = p.at("eps");
  const double amp = p.at("amp"), x0 = p.at("x0");
  if (std::fabs(eps) >= 1.0) {
    throw InvalidArgument("model 'crowd-aversion-1d': |eps| must be < 1");
  }
  ModelSpec m;
  m.name = "crowd-aversion-1d";
  m.controls = speeds_1d(v);
  m.summarize = fourier_moments;
  m.f = [](double, const TorusPoint&, const Stats&, const Coords& u) { return u; };
  m.g = [lam, eps](double t, const TorusPoint& x, const Stats& s, const Coords&) {
    return -lam * (1.0 + eps * std::sin(kTwoPi * t)) * crowd_density(x[0], s);
  };
  m.sigma = [amp, x0](const TorusPoint& x, const Stats&) {
    return amp * std::cos(kTwoPi * (x[0] - x0));
  };
  m.L = kPi * std::fabs(lam) * (1.0 + std::fabs(eps));
  m.kappa = kTwoPi * std::fabs(amp);
  m.L_t = kTwoPi * std::fabs(lam * eps);
  m.R = m.c = std::max(std::fabs(v), std::fabs(lam) * (1.0 + std::fabs(eps)));
  m.f_depends_on_m = false;
  return m;
}

// Speed reduced by the local density.
ModelSpec congestion_model(const ModelParams& given) {
  const ModelParams p = with_defaults(
      "congestion-1d", given,
      {{"speed", 1.0}, {"gamma", 1.0}, {"beta", 0.5}, {"x0", 0.5}, {"amp", 0.5}});
  const double v = p.at("speed"), gam = p.at("gamma"), beta = p.at("beta");
  const double x0 = p.at("x0"), amp = p.at("amp");
  if (gam < 0.0) throw InvalidArgument("model 'congestion-1d': gamma must be >= 0");
  ModelSpec m;
  m.name = "congestion-1d";
  m.controls = speeds_1d(v);
  m.summarize = fourier_moments;
  m.f = [gam](double, const TorusPoint& x, const Stats& s, const Coords& u) {
    const double k = 1.0 / (1.0 + gam * crowd_density(x[0], s));
    return Coords{u[0] * k, 0.0};
  };
  m.g = [beta, x0](double, const TorusPoint& x, const Stats&, const Coords&) {
    return -0.5 * beta * (1.0 - std::cos(kTwoPi * (x[0] - x0)));
  };
  m.sigma = [amp](const TorusPoint& x, const Stats&) { return amp * std::cos(kTwoPi * x[0]); };
  m.L = std::max(kPi * std::fabs(v) * gam, kPi * std::fabs(beta));
  m.kappa = kTwoPi * std::fabs(amp);
  m.R = m.c = std::max(std::fabs(v), std::fabs(beta));
  return m;
}

// Attraction toward the population on the circle, a periodic analogue of
// relaxation toward the mean: x' = (rate / 2 pi) sum_j w_j sin 2 pi (x_j - x).
ModelSpec contraction_model(const ModelParams& given) {
  const ModelParams p =
      with_defaults("mean-contraction-1d", given, {{"rate", 1.0}, {"amp", 1.0}});
  const double rate = p.at("rate"), amp = p.at("amp");
  ModelSpec m;
  m.name = "mean-contraction-1d";
  m.controls = {Coords{0.0, 0.0}};
  m.summarize = fourier_moments;
  m.f = [rate](double, const TorusPoint& x, const Stats& s, const Coords&) {
    const double c = std::cos(kTwoPi * x[0]), sn = std::sin(kTwoPi * x[0]);
    return Coords{rate / kTwoPi * (s[1] * c - s[0] * sn), 0.0};
  };
  m.g = [](double, const TorusPoint&, const Stats&, const Coords&) { return 0.0; };
  m.sigma = [amp](const TorusPoint& x, const Stats&) { return amp * std::cos(kTwoPi * x[0]); };
  m.L = std::fabs(rate);
  m.kappa = kTwoPi * std::fabs(amp);
  m.R = m.c = std::fabs(rate) / kTwoPi;
  m.mesh = 1;
  return m;
}

TorusPoint random_point(int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return dim == 1 ? torus_point(u(rng)) : torus_point(u(rng), u(rng));
}

DiscreteMeasure random_measure(int dim, int atoms, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  DiscreteMeasure m;
  for (int i = 0; i < atoms; ++i) m.atoms.push_back({random_point(dim, rng), u(rng)});
  normalize(m);
  return m;
}

}  // namespace

double ModelSpec::alpha(double delta) const { return L_t * std::fabs(delta); }

std::vector<std::string> model_presets() {
  return {"zero", "reward", "drift-1d", "drift-2d", "crowd-aversion-1d",
          "congestion-1d", "mean-contraction-1d"};
}

ModelSpec make_model(const std::string& preset, const ModelParams& params) {
  ModelParams p = params;
  int mesh = -1;
  if (auto it = p.find("mesh"); it != p.end()) {
    mesh = static_cast<int>(it->second);
    if (mesh < 1) throw InvalidArgument("model: mesh must be >= 1");
    p.erase(it);
  }
  ModelSpec m;
  if (preset == "zero") m = zero_model(p);
  else if (preset == "reward") m = reward_model(p);
  else if (preset == "drift-1d") m = drift_model(p);
  else if (preset == "drift-2d") m = drift2d_model(p);
  else if (preset == "crowd-aversion-1d") m = crowd_model(p);
  else if (preset == "congestion-1d") m = congestion_model(p);
  else if (preset == "mean-contraction-1d") m = contraction_model(p);
  else throw InvalidArgument("unknown model preset '" + preset + "'");
  if (mesh > 0) m.mesh = mesh;
  return m;
}

ModelAudit validate_model(const ModelSpec& model, std::uint64_t seed, int probes) {
  if (model.controls.empty()) throw InvalidArgument("model: empty control set");
  if (model.c < model.R) throw InvalidArgument("model: c must be >= R");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> uk(0, model.controls.size() - 1);
  ModelAudit audit;
  const int d = model.dim;
  for (int k = 0; k < probes; ++k) {
    const DiscreteMeasure m1 = random_measure(d, 3, rng);
    const DiscreteMeasure m2 = (k % 2 == 0) ? m1 : random_measure(d, 3, rng);
    const Stats s1 = model.summarize(m1), s2 = model.summarize(m2);
    const TorusPoint x1 = random_point(d, rng);
    TorusPoint x2 = x1;
    if (k % 3 != 0) {
      // Nearby second point: Lipschitz ratios are sharpest at short range.
      Coords off{};
      for (int i = 0; i < d; ++i) off[static_cast<std::size_t>(i)] = (ut(rng) - 0.5) * 0.02;
      x2 = translate(x1, off);
    }
    const double t1 = ut(rng), t2 = (k % 5 == 0) ? ut(rng) : t1;
    const Coords& u = model.controls[uk(rng)];
    const Coords f1 = model.f(t1, x1, s1, u), f2 = model.f(t1, x2, s2, u);
    if (!model.f_depends_on_m && k % 2 == 1) {
      const Coords fs = model.f(t1, x1, s2, u);
      for (int i = 0; i < d; ++i) {
        if (fs[static_cast<std::size_t>(i)] != f1[static_cast<std::size_t>(i)]) {
          throw InvalidArgument("model '" + model.name + "': f depends on m but is declared m-free");
        }
      }
    }
    const double g1 = model.g(t1, x1, s1, u), g2 = model.g(t1, x2, s2, u);
    audit.sup_f = std::max(audit.sup_f, norm(f1, d));
    audit.sup_g = std::max(audit.sup_g, std::fabs(g1));
    const double dx = torus_dist(x1, x2) + (k % 2 == 0 ? 0.0 : w1_distance(m1, m2));
    if (dx > 1e-12) {
      Coords df{};
      for (int i = 0; i < d; ++i) df[static_cast<std::size_t>(i)] = f1[static_cast<std::size_t>(i)] - f2[static_cast<std::size_t>(i)];
      audit.lip_fg = std::max({audit.lip_fg, norm(df, d) / dx, std::fabs(g1 - g2) / dx});
      const double dxx = torus_dist(x1, x2);
      if (dxx > 1e-12) {
        audit.lip_sigma = std::max(audit.lip_sigma,
                                   std::fabs(model.sigma(x1, s1) - model.sigma(x2, s1)) / dxx);
      }
    }
    if (t1 != t2) {
      const Coords ft = model.f(t2, x1, s1, u);
      Coords df{};
      for (int i = 0; i < d; ++i) df[static_cast<std::size_t>(i)] = f1[static_cast<std::size_t>(i)] - ft[static_cast<std::size_t>(i)];
      const double dt = std::fabs(t1 - t2);
      audit.lip_t = std::max({audit.lip_t, norm(df, d) / dt,
                              std::fabs(g1 - model.g(t2, x1, s1, u)) / dt});
    }
  }
  const double slack = 1.05;
  auto fail = [&](const std::string& what) {
    throw InvalidArgument("model '" + model.name + "': " + what);
  };
  if (audit.sup_f > model.R * slack + 1e-12 || audit.sup_g > model.R * slack + 1e-12) {
    fail("declared R below sampled sup of |f|, |g|");
  }
  if (audit.lip_fg > model.L * slack + 1e-9) fail("declared L below sampled Lipschitz ratio");
  if (audit.lip_sigma > model.kappa * slack + 1e-9) fail("declared kappa below sampled ratio");
  if (audit.lip_t > model.L_t * slack + 1e-9) fail("declared time modulus too small");
  return audit;
}

std::vector<std::vector<double>> mixture_mesh(std::size_t K, int M) {
  if (K == 0) throw InvalidArgument("mixture_mesh: no controls");
  if (M < 1) throw InvalidArgument("mixture_mesh: subdivisions must be >= 1");
  std::vector<std::vector<double>> pure, rest;
  std::vector<int> counts(K, 0);
  // Enumerate compositions of M into K parts, lexicographically descending.
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == K) {
      counts[i] = left;
      std::vector<double> w(K);
      int nonzero = 0;
      for (std::size_t k = 0; k < K; ++k) {
        w[k] = static_cast<double>(counts[k]) / M;
        nonzero += counts[k] > 0;
      }
      (nonzero == 1 ? pure : rest).push_back(std::move(w));
      return;
    }
    for (int c = left; c >= 0; --c) {
      counts[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, M);
  pure.insert(pure.end(), rest.begin(), rest.end());
  return pure;
}

std::vector<Velocity> control_extremes(const ModelSpec& model, double t,
                                       const TorusPoint& x, const Stats& m) {
  std::vector<Velocity> out;
  out.reserve(model.controls.size());
  for (const auto& u : model.controls) out.push_back({model.f(t, x, m, u), model.g(t, x, m, u)});
  return out;
}

Velocity mix(const std::vector<Velocity>& ext, const std::vector<double>& w) {
  Velocity v;
  for (std::size_t k = 0; k < ext.size(); ++k) {
    if (w[k] == 0.0) continue;
    v.a[0] += w[k] * ext[k].a[0];
    v.a[1] += w[k] * ext[k].a[1];
    v.b += w[k] * ext[k].b;
  }
  return v;
}

std::vector<Stats> summarize_flow(const ModelSpec& model, const Flow& flow) {
  std::vector<Stats> s(flow.size());
  for (std::size_t k = 0; k < flow.size(); ++k) s[k] = model.summarize(flow.projected(k));
  return s;
}

}  // namespace mfgv
