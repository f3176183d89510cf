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

#ifndef MFGV_TESTS_TEST_UTIL_HPP_
#define MFGV_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mfgv/grid_function.hpp"
#include "mfgv/measures.hpp"
#include "mfgv/torus.hpp"

namespace mfgv::testing {

inline TorusPoint rand_point(int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return dim == 1 ? torus_point(u(rng)) : torus_point(u(rng), u(rng));
}

inline DiscreteMeasure rand_measure(int dim, int atoms, std::mt19937_64& rng,
                                    bool equal_weights = false) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  DiscreteMeasure m;
  for (int i = 0; i < atoms; ++i) {
    m.atoms.push_back({rand_point(dim, rng), equal_weights ? 1.0 : u(rng)});
  }
  normalize(m);
  return m;
}

inline ExtendedMeasure rand_extended(int dim, int atoms, std::mt19937_64& rng,
                                     double zspread = 1.0) {
  std::uniform_real_distribution<double> u(-zspread, zspread);
  ExtendedMeasure nu = lift(rand_measure(dim, atoms, rng));
  for (auto& a : nu.atoms) a.point.z = u(rng);
  return nu;
}

/// Random smooth periodic function sum_k c_k cos(2 pi k x + p_k) sampled on
/// a lattice; the returned Lipschitz bound holds for the interpolant.
inline GridFunction rand_trig(const TorusLattice& lat, std::mt19937_64& rng, int modes = 3,
                              double scale = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c, p, q;
  for (int k = 0; k < modes; ++k) {
    c.push_back(scale * u(rng) / (k + 1));
    p.push_back(u(rng) * 3.0);
    q.push_back(u(rng) * 3.0);
  }
  return GridFunction::sample(lat, [&](const TorusPoint& x) {
    double s = 0.0;
    for (int k = 0; k < modes; ++k) {
      const double arg = 2.0 * std::numbers::pi * (k + 1) * x[0] + p[static_cast<std::size_t>(k)];
      double term = std::cos(arg);
      if (x.dim == 2) term *= std::cos(2.0 * std::numbers::pi * (k + 1) * x[1] + q[static_cast<std::size_t>(k)]);
      s += c[static_cast<std::size_t>(k)] * term;
    }
    return s;
  });
}

/// Rescales phi so that its interpolant is exactly K-Lipschitz.
inline GridFunction with_lipschitz(const GridFunction& phi, double K) {
  const double l = phi.lipschitz();
  std::vector<double> v = phi.values();
  if (l > 0.0) {
    for (double& x : v) x *= K / l;
  }
  return GridFunction(phi.lattice(), std::move(v));
}

/// All shifts k in {-1,0,1}^d, minimum Euclidean norm of x - y + k.
inline double brute_torus_dist(const TorusPoint& x, const TorusPoint& y) {
  double best = 1e9;
  if (x.dim == 1) {
    for (int k = -1; k <= 1; ++k) best = std::min(best, std::fabs(x[0] - y[0] + k));
    return best;
  }
  for (int k = -1; k <= 1; ++k) {
    for (int l = -1; l <= 1; ++l) {
      best = std::min(best, std::hypot(x[0] - y[0] + k, x[1] - y[1] + l));
    }
  }
  return best;
}

/// Mean matched distance minimized over all permutations (equal weights).
template <class Dist>
double brute_matching(std::size_t n, Dist dist) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  double best = 1e18;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += dist(i, perm[i]);
    best = std::min(best, s / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace mfgv::testing

#endif  // MFGV_TESTS_TEST_UTIL_HPP_
