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

#include <optional>
#include <vector>

#include "lchs/operators.hpp"

namespace lchs {

/// Classical RK4 with step halving. Independent of every approximation the
/// LCHS path makes: no splitting, no kernel quadrature.
struct OracleConfig {
  double tolerance = 1e-10;
  int initial_steps = 8;
  int max_halvings = 12;
};

/// W(t1) for W' = G(t) W, W(t0) = I, refined until two successive halvings
/// differ by less than tolerance/2.
ComplexMatrix ordered_exponential(const MatrixFunction& rate, Index dim,
                                  double t0, double t1,
                                  const OracleConfig& config);

/// T exp(-int_{t0}^{t1} A(s) ds).
ComplexMatrix time_ordered_exp(const TimeDependentGenerator& gen, double t0,
                               double t1, double tol);
ComplexMatrix time_ordered_exp(const TimeDependentGenerator& gen, double t0,
                               double t1, const OracleConfig& config);

/// T exp(-i int (H + k L)), the Hamiltonian flow at kernel frequency k.
ComplexMatrix hamiltonian_flow_oracle(const TimeDependentGenerator& gen,
                                      double k, double t0, double t1,
                                      double tol);

/// exp(-i H s) by eigendecomposition. Throws PreconditionError if H is not
/// Hermitian within 1e-10 (relative to its size).
ComplexMatrix hermitian_propagator_exact(const ComplexMatrix& h, double s);

/// u(t1) for du/dt = -A u + b with u(t0) = u0, by RK4 with step halving on
/// the state. Stores the state at every requested time (ascending, within
/// [t0, t1]).
struct OracleTrajectory {
  std::vector<double> times;
  std::vector<ComplexVector> states;
  /// Norms at every fine RK4 step of the accepted refinement level.
  std::vector<double> step_norms;
};

OracleTrajectory oracle_trajectory(const ProblemInstance& problem,
                                   const std::vector<double>& times,
                                   const OracleConfig& config = {});

ComplexVector oracle_solve(const ProblemInstance& problem, double t,
                           const OracleConfig& config = {});

/// Which propagators go into the right-hand side of the identity check.
enum class IdentityRhs { Oracle, ExactBackend };

struct IdentityCheck {
  double lhs_rhs_error = 0.0;
  double truncation_bound = 0.0;
  /// |sum_j c_j - 1|, the quadrature deficit of the kernel weights.
  double weight_deficit = 0.0;
  double cutoff = 0.0;
  int intervals = 0;
};

/// ||T exp(-int A) - sum_j c_j T exp(-i int (H + k_j L))|| on the trapezoid
/// grid with cutoff K and M intervals. L(t) must be positive semidefinite on
/// the default sampling grid.
IdentityCheck verify_lchs_identity(const TimeDependentGenerator& gen,
                                   double horizon, double cutoff,
                                   int intervals, double tol_ode,
                                   IdentityRhs rhs = IdentityRhs::Oracle);

/// Default node count 200 R (||L|| + ||H|| + 1), capped at 2e7.
long default_principal_value_nodes(const ComplexMatrix& h,
                                   const ComplexMatrix& l, double radius);

/// || int_{-R}^{R} (1 + i k)^{-1} exp(-i (H + k L)) dk || by the trapezoid rule
/// with `nodes` intervals. Requires L positive definite.
double verify_principal_value(const ComplexMatrix& h, const ComplexMatrix& l,
                              double radius, std::optional<long> nodes = {});

}  // namespace lchs
