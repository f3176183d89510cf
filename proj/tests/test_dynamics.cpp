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
#include <numbers>
#include <random>

#include "doctest.h"
#include "mfgv/dynamics.hpp"
#include "mfgv/error.hpp"
#include "mfgv/wasserstein.hpp"
#include "test_util.hpp"

namespace mfgv {
namespace {

constexpr double kPi = std::numbers::pi;

// Segment distance in the plane (oracle for hull projection).
double seg_dist(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double L2 = vx * vx + vy * vy;
  double t = L2 > 0 ? ((px - ax) * vx + (py - ay) * vy) / L2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - ax - t * vx, py - ay - t * vy);
}

// Barycentric coordinates of p in triangle (a, b, c) by Cramer's rule.
std::array<double, 3> barycentric(const Velocity& p, const Velocity& a, const Velocity& b,
                                  const Velocity& c) {
  const double det = (b.a[0] - a.a[0]) * (c.b - a.b) - (c.a[0] - a.a[0]) * (b.b - a.b);
  const double l1 = ((p.a[0] - a.a[0]) * (c.b - a.b) - (c.a[0] - a.a[0]) * (p.b - a.b)) / det;
  const double l2 = ((b.a[0] - a.a[0]) * (p.b - a.b) - (p.a[0] - a.a[0]) * (b.b - a.b)) / det;
  return {1 - l1 - l2, l1, l2};
}

ModelSpec three_control_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  ModelSpec m = make_model("drift-1d");
  m.controls = {Coords{u(rng), 0}, Coords{u(rng), 0}, Coords{u(rng), 0}};
  const double g0 = u(rng), g1 = u(rng), g2 = u(rng);
  const std::vector<Coords> us = m.controls;
  m.g = [=](double, const TorusPoint&, const Stats&, const Coords& c) {
    return c[0] == us[0][0] ? g0 : (c[0] == us[1][0] ? g1 : g2);
  };
  return m;
}

TEST_CASE("vectogram examples") {
  const ModelSpec zero = make_model("zero");
  const auto single = vectogram(zero, 0.0, torus_point(0.3), Stats{}, 5);
  REQUIRE(single.size() == 1);
  CHECK(single[0].v.a[0] == 0.0);
  ModelSpec seg = make_model("drift-1d", {{"beta", 0.0}});
  const auto pts = vectogram(seg, 0.0, torus_point(0.3), Stats{}, 2);
  REQUIRE(pts.size() == 3);
  std::vector<double> as;
  for (const auto& c : pts) {
    as.push_back(c.v.a[0]);
    CHECK(c.v.b == doctest::Approx(0.0));
  }
  std::sort(as.begin(), as.end());
  CHECK(as[0] == doctest::Approx(-1.0));
  CHECK(as[1] == doctest::Approx(0.0));
  CHECK(as[2] == doctest::Approx(1.0));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelSpec m = three_control_model(rng);
    const auto ext = control_extremes(m, 0.0, torus_point(0.1), Stats{});
    for (const auto& c : vectogram(m, 0.0, torus_point(0.1), Stats{}, 5)) {
      const auto l = barycentric(c.v, ext[0], ext[1], ext[2]);
      for (double x : l) CHECK(x >= -1e-9);
    }
  }
}

TEST_CASE("distance to the vectogram") {
  const ModelSpec zero = make_model("zero");
  CHECK(dist_to_vectogram(zero, Velocity{}, 0.0, torus_point(0.2), Stats{}) == 0.0);
  Velocity off;
  off.a[0] = 0.3;
  off.b = 0.4;
  CHECK(dist_to_vectogram(zero, off, 0.0, torus_point(0.2), Stats{}) == doctest::Approx(0.5));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const ModelSpec m = three_control_model(rng);
    const auto ext = control_extremes(m, 0.0, torus_point(0.0), Stats{});
    Velocity v;
    v.a[0] = u(rng);
    v.b = u(rng);
    const auto l = barycentric(v, ext[0], ext[1], ext[2]);
    double want = 0.0;
    if (!(l[0] >= 0 && l[1] >= 0 && l[2] >= 0)) {
      want = 1e9;
      for (int i = 0; i < 3; ++i) {
        const auto& a = ext[static_cast<std::size_t>(i)];
        const auto& b = ext[static_cast<std::size_t>((i + 1) % 3)];
        want = std::min(want, seg_dist(v.a[0], v.b, a.a[0], a.b, b.a[0], b.b));
      }
    }
    CHECK(dist_to_hull(v, ext, 1) == doctest::Approx(want).epsilon(1e-9).scale(1.0));
    CHECK(std::fabs(dist_to_hull(v, ext, 1) - want) < 1e-6);
    for (std::size_t k = 0; k < ext.size(); ++k) CHECK(dist_to_hull(ext[k], ext, 1) < 1e-12);
  }
}

TEST_CASE("relaxed trajectories") {
  const std::vector<double> times = uniform_times(0.0, 1.0, 10);
  const Flow flow = Flow::constant(times, lift(dirac(torus_point(0.0))));
  RelaxedControl one;
  one.weights.assign(10, {1.0});
  const auto still = relaxed_trajectory(make_model("zero"), 0.0, 1.0, torus_point(0.4), flow, one, 10);
  for (const auto& w : still) {
    CHECK(w.x[0] == doctest::Approx(0.4));
    CHECK(w.z == 0.0);
  }
  const auto paid = relaxed_trajectory(make_model("reward"), 0.0, 1.0, torus_point(0.4), flow, one, 10);
  for (std::size_t k = 0; k < times.size(); ++k) CHECK(paid[k].z == doctest::Approx(times[k]));
  RelaxedControl half;
  half.weights.assign(10, {0.5, 0.5});
  const auto mid = relaxed_trajectory(make_model("drift-1d", {{"beta", 0.0}}), 0.0, 1.0,
                                      torus_point(0.4), flow, half, 10);
  CHECK(mid.back().x[0] == doctest::Approx(0.4));
  CHECK_THROWS_AS(relaxed_trajectory(make_model("zero"), 0.0, 2.0, torus_point(0.4), flow, one, 10),
                  InvalidArgument);
}

SelectionPolicy first_control() {
  return [](std::size_t, std::size_t, double, const TorusPoint&, const Stats&) {
    return std::vector<double>{1.0, 0.0};
  };
}

TEST_CASE("mfdi without coupling converges at once") {
  std::mt19937_64 rng(5);
  const ModelSpec m = make_model("drift-1d");
  const ExtendedMeasure nu0 = lift(testing::rand_measure(1, 6, rng));
  MfdiOptions opt;
  opt.steps = 16;
  const MfdiResult r = mfdi_solve(m, 0.0, 1.0, nu0, first_control(), opt);
  CHECK(r.iterations == 1);
  CHECK(r.residual < opt.tol);
  for (std::size_t k = 0; k < r.flow.size(); ++k) {
    CHECK(w1(evaluate_index(r.chi, k), r.flow.extended(k)).distance < 1e-12);
  }
  CHECK(max_speed(r.chi) <= m.R + 1e-12);
  CHECK(verify_paths(m, r.chi, r.flow) < 1e-12);

  const MfdiResult single = mfdi_solve(m, 0.0, 1.0, lift(dirac(torus_point(0.3))), first_control(), opt);
  CHECK(single.chi.size() == 1);
  CHECK(single.chi.atoms[0].point.back().x[0] == doctest::Approx(0.3 - 1.0 + 1.0).epsilon(1e-12));
}

TEST_CASE("mfdi mean contraction fixed point") {
  const double rate = 2.0;
  const ModelSpec m = make_model("mean-contraction-1d", {{"rate", rate}});
  const double d0 = 0.3;
  ExtendedMeasure nu0;
  nu0.atoms = {{{torus_point(0.2), 0.0}, 0.5}, {{torus_point(0.2 + d0), 0.0}, 0.5}};
  auto only = [](std::size_t, std::size_t, double, const TorusPoint&, const Stats&) {
    return std::vector<double>{1.0};
  };
  for (int steps : {64, 128, 256}) {
    MfdiOptions opt;
    opt.steps = steps;
    opt.tol = 1e-12;
    const MfdiResult r = mfdi_solve(m, 0.0, 1.0, nu0, only, opt);
    CHECK(r.residual < 1e-12);
    CHECK(r.iterations >= 2);
    // Gap oracle: tan(pi d(t)) = tan(pi d0) exp(-rate t).
    double worst = 0.0;
    for (std::size_t k = 0; k < r.chi.times.size(); ++k) {
      const double t = r.chi.times[k];
      const double want = std::atan(std::tan(kPi * d0) * std::exp(-rate * t)) / kPi;
      const double got = displacement(r.chi.atoms[0].point[k].x, r.chi.atoms[1].point[k].x)[0];
      worst = std::max(worst, std::fabs(got - want));
      // Antisymmetry conserves the unwrapped mean.
      const double mean = 0.2 + 0.5 * d0 +
                          0.5 * (displacement(torus_point(0.2), r.chi.atoms[0].point[k].x)[0] +
                                 displacement(torus_point(0.2 + d0), r.chi.atoms[1].point[k].x)[0]);
      CHECK(mean == doctest::Approx(0.2 + 0.5 * d0).epsilon(1e-12));
    }
    CHECK(worst < 2.0 * rate / steps);
    // Re-running from the returned flow changes nothing.
    MfdiOptions again = opt;
    again.seed = &r.flow;
    const MfdiResult r2 = mfdi_solve(m, 0.0, 1.0, nu0, only, again);
    CHECK(flow_distance(r2.flow, r.flow) < opt.tol);
  }
}

TEST_CASE("mfdi reports non-convergence") {
  const ModelSpec m = make_model("mean-contraction-1d", {{"rate", 2.0}});
  ExtendedMeasure nu0;
  nu0.atoms = {{{torus_point(0.2), 0.0}, 0.5}, {{torus_point(0.6), 0.0}, 0.5}};
  MfdiOptions opt;
  opt.max_iter = 2;
  opt.max_splits = 0;
  opt.tol = 1e-14;
  auto only = [](std::size_t, std::size_t, double, const TorusPoint&, const Stats&) {
    return std::vector<double>{1.0};
  };
  try {
    mfdi_solve(m, 0.0, 1.0, nu0, only, opt);
    FAIL("expected ConvergenceFailure");
  } catch (const ConvergenceFailure& e) {
    CHECK(e.last_residual() > 0.0);
  }
}

TEST_CASE("verify_sol") {
  const ModelSpec m = make_model("drift-1d");
  const auto times = uniform_times(0.0, 1.0, 10);
  std::vector<Stats> stats(times.size());
  RelaxedControl xi;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 10; ++k) {
    const double l = u(rng);
    xi.weights.push_back({l, 1 - l});
  }
  const Flow flow = Flow::constant(times, lift(dirac(torus_point(0.0))));
  const auto path = relaxed_trajectory(m, 0.0, 1.0, torus_point(0.1), flow, xi, 10);
  const double dt = 0.1;
  CHECK(verify_sol(m, path, times, stats) <= m.alpha(dt) + m.L * m.R * dt + 1e-9);

  const ModelSpec still = make_model("drift-1d", {{"beta", 0.0}});
  const Trajectory rest(times.size(), ExtendedPoint{torus_point(0.3), 0.0});
  CHECK(verify_sol(still, rest, times, stats) == doctest::Approx(0.0).scale(1.0));

  Trajectory jump = rest;
  for (std::size_t k = 5; k < jump.size(); ++k) jump[k].z = 1.0;
  CHECK(verify_sol(still, jump, times, stats) >= 9.0);
}

TEST_CASE("concatenating feasible flows") {
  std::mt19937_64 rng(7);
  const ModelSpec m = make_model("drift-1d");
  MfdiOptions opt;
  opt.steps = 20;
  const MfdiResult r = mfdi_solve(m, 0.0, 1.0, lift(testing::rand_measure(1, 4, rng)),
                                  first_control(), opt);
  const double whole = verify_paths(m, r.chi, r.flow);
  const GluedPaths g = concat_flows(m, restrict_paths(r.chi, 0.0, 0.5), restrict_paths(r.chi, 0.5, 1.0));
  CHECK(g.residual == doctest::Approx(whole).scale(1.0));

  PathMeasure tail = restrict_paths(r.chi, 0.5, 1.0);
  for (auto& a : tail.atoms) a.point.back().z += 5.0;
  CHECK(concat_flows(m, restrict_paths(r.chi, 0.0, 0.5), tail).residual > 1.0);

  // Branch every endpoint into two feasible continuations.
  PathMeasure head = restrict_paths(r.chi, 0.0, 0.5);
  const ExtendedMeasure mid = evaluate(head, 0.5);
  const auto t2 = uniform_times(0.5, 1.0, 10);
  const Flow f2 = Flow::constant(t2, mid);
  PathMeasure branch;
  branch.times = t2;
  for (const auto& a : mid.atoms) {
    for (double l : {0.2, 0.9}) {
      RelaxedControl xi;
      xi.weights.assign(10, {l, 1 - l});
      branch.atoms.push_back({relaxed_trajectory(m, 0.5, 1.0, a.point.x, f2, xi, 10, a.point.z),
                              a.weight * 0.5});
    }
  }
  const GluedPaths gb = concat_flows(m, head, branch);
  CHECK(gb.chi.size() == 8);
  CHECK(gb.residual < 1e-12);
}

}  // namespace
}  // namespace mfgv
