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

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "lchs/kernel_quadrature.hpp"
#include "lchs/operators.hpp"
#include "lchs/propagators.hpp"

namespace lchs {

struct SolverOptions {
  PropagatorBackend backend = ExactStepping{};
  /// Fixed cutoff K instead of the one derived from eps.
  std::optional<double> cutoff;
  /// Fixed kernel interval count M; disables adaptive refinement in k.
  std::optional<int> intervals;
  /// Fixed time interval count M_t for the source quadrature.
  std::optional<int> time_intervals;
  /// Re-split the tolerance of a combined solve using the first-pass norm.
  bool second_pass = true;
  /// Sampling grid for the automatic shift; defaults to default_time_grid.
  std::optional<std::vector<double>> shift_grid;
};

struct QueryTally {
  std::uint64_t propagator_calls = 0;
  std::uint64_t state_preparations = 0;
  std::uint64_t exponentials = 0;
  std::uint64_t phase_multiplications = 0;
  std::uint64_t exact_steps = 0;

  QueryTally& operator+=(const PropagationTally& t);
};

/// Targets the solver used for each error source.
struct ErrorBudget {
  double truncation = 0.0;
  double quadrature = 0.0;
  double propagator = 0.0;
};

struct LCHSResult {
  ComplexVector solution;    // approximation of u(T), unnormalized
  ComplexVector normalized;  // solution / ||solution||
  double success_probability = 0.0;
  /// Block-encoding prefactor eta; success_probability = (||solution|| / eta)^2.
  double prefactor = 0.0;
  double homogeneous_prefactor = 0.0;  // exp(cT) ||c||_1 ||u0||
  double source_prefactor = 0.0;       // exp(cT) ||c~||_1
  /// Amplitude-amplification repeats ceil(eta / ||solution||), not simulated.
  std::uint64_t expected_repeats = 0;
  double shift = 0.0;
  KernelGrid grid;
  int time_intervals = 0;  // 0 for homogeneous solves
  int refinements = 0;
  double quadrature_change = 0.0;  // last adaptive move
  ErrorBudget budget;
  QueryTally tally;
  std::optional<double> oracle_error;
};

/// The problem's generator on [0, T] with its shift applied. Automatic
/// shifts only raise L: c = max(0, -min_t lambda_min(L(t))). Throws
/// PreconditionError if L(t) + cI is not semidefinite on the grid.
ShiftedGenerator prepare_generator(
    const ProblemInstance& problem, double horizon,
    const std::optional<std::vector<double>>& shift_grid = {});

/// u(T) ~ exp(cT) sum_j c_j U_j(T) u0 for the (shifted) homogeneous problem.
LCHSResult solve_homogeneous(const ProblemInstance& problem, double horizon,
                             double eps, const SolverOptions& options = {});

/// Adds the source term sum_{j,j'} c~_{j,j'} U_j(s_j' -> T) b(s_j'). Falls back
/// to solve_homogeneous when the source is absent or identically zero.
LCHSResult solve_inhomogeneous(const ProblemInstance& problem, double horizon,
                               double eps, const SolverOptions& options = {});

/// Dispatches on the presence of a source.
LCHSResult solve(const ProblemInstance& problem, double horizon, double eps,
                 const SolverOptions& options = {});

struct CombinedState {
  ComplexVector state;
  double prefactor = 0.0;
  double success_probability = 0.0;
};

/// theta0 x0 + theta1 x1 with prefactor eta0 theta0 + eta1 theta1.
CombinedState combine_states(const ComplexVector& x0, double eta0,
                             const ComplexVector& x1, double eta1,
                             double theta0 = 1.0, double theta1 = 1.0);

nlohmann::json to_json(const QueryTally& tally);
nlohmann::json to_json(const LCHSResult& result);

}  // namespace lchs
