// Copyright 2026 The LCHS Emulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "lchs/lchs_solver.hpp"
#include "lchs/operators.hpp"
#include "lchs/propagators.hpp"

namespace lchs {

/// Real potential V_R(x, t).
using RealPotential = std::function<double(double x, double t)>;

/// Cell-centred grid x_i = (i + 1/2) h on [0, length] with h = length / N.
struct CapGrid {
  Index points = 0;
  double length = 0.0;
  double spacing = 0.0;
  RealVector x;
};

CapGrid make_cap_grid(Index points, double length);

/// Schroedinger equation with an absorbing potential, i du/dt =
/// (-1/2 d_xx + V_R - i V_I) u, written as du/dt = -(V_I + i H(t)) u.
struct CapProblem {
  CapGrid grid;
  ComplexMatrix kinetic;  // -1/2 Laplacian, Dirichlet closure
  RealPotential real_potential;
  bool real_potential_static = true;
  RealVector absorber;  // V_I >= 0
  TimeDependentGenerator generator;
};

/// Tridiagonal -1/2 Laplacian: 1/h^2 on the diagonal, -1/(2 h^2) off it.
ComplexMatrix kinetic_matrix(Index points, double spacing);

/// Throws PreconditionError on N < 4 or a negative absorber sample.
/// A null real potential means V_R = 0.
CapProblem discretize(Index points, double length, RealPotential real_potential,
                      const RealVector& absorber, double horizon,
                      bool real_potential_static = true);

/// exp(-(x - x0)^2 / (4 sigma^2) + i p0 x), normalized.
ComplexVector gaussian_packet(const CapGrid& grid, double x0, double p0,
                              double sigma);

/// eta ((w - d) / w)^m inside the layer of width w at each edge, 0 elsewhere.
RealVector absorber_profile(const CapGrid& grid, double width, double strength,
                            int power);

struct CapSnapshot {
  double t = 0.0;
  double norm = 0.0;         // ||u_LCHS(t)||
  double oracle_norm = 0.0;  // ||u_oracle(t)||
  double error = 0.0;        // ||u_LCHS - u_oracle|| / ||u_oracle||
  std::vector<double> density;  // |u_LCHS|^2
};

struct CapDemoResult {
  std::vector<CapSnapshot> snapshots;
  /// Largest increase of the oracle norm between consecutive fine steps.
  double oracle_norm_increase = 0.0;
  QueryTally tally;
};

/// LCHS solve at each snapshot time next to the RK4 oracle. Throws
/// DecayedSolutionError if the final norm drops below 1e-6 ||u0||.
CapDemoResult run_cap_demo(const CapProblem& cap, const ComplexVector& u0,
                           double horizon, double eps,
                           const PropagatorBackend& backend,
                           const std::vector<double>& snapshot_times);

nlohmann::json to_json(const CapDemoResult& result);

}  // namespace lchs
