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
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lchs/operators.hpp"

namespace lchs {

/// One factor pair of a product formula: exp(-i H beta dt) exp(-i k L alpha dt),
/// applied L first. Offsets locate the evaluation time inside the step, as
/// fractions of dt.
struct FormulaStage {
  double l_coeff = 0.0;   // alpha
  double h_coeff = 0.0;   // beta
  double l_offset = 0.0;  // gamma
  double h_offset = 0.0;  // delta
};

struct ProductFormula {
  int order = 1;
  std::vector<FormulaStage> stages;

  std::size_t stage_count() const { return stages.size(); }
};

/// 1/(4 - 4^(1/3)), the outer weight of the fourth-order fractal.
double suzuki_weight();

/// p = 1: Lie splitting. p = 2: symmetric Strang (H half, L full, H half).
/// p = 4: five Strang blocks weighted (u, u, 1 - 4u, u, u). Each exponential
/// is evaluated at the midpoint of the sub-interval it advances.
ProductFormula suzuki_recursion(int order);

/// Tolerance used by direct propagation when a backend leaves it unset.
inline constexpr double kDefaultPropagatorTolerance = 1e-10;

/// Fourth-order Magnus steps with exact exponentials, refined by step
/// doubling. A tolerance of 0 means "unset": direct calls use
/// kDefaultPropagatorTolerance and the solver substitutes its error budget.
struct ExactStepping {
  double tolerance = 0.0;
};

struct Trotter {
  ProductFormula formula;
  int steps = 1;
};

/// Requires diagonal, time-independent L. Tolerance as for ExactStepping.
struct InteractionPicture {
  double tolerance = 0.0;
};

using PropagatorBackend = std::variant<ExactStepping, Trotter, InteractionPicture>;

/// "exact", "exact:tol", "trotter:p,r", "interaction", "interaction:tol".
/// Throws ValidationError on malformed text.
PropagatorBackend parse_backend(std::string_view text);
std::string describe(const PropagatorBackend& backend);

/// Per-propagation operation counts; summed by the solver.
struct PropagationTally {
  std::uint64_t propagator_calls = 0;
  std::uint64_t exponentials = 0;          // product-formula factors applied
  std::uint64_t phase_multiplications = 0;  // diagonal fast-forward work
  std::uint64_t exact_steps = 0;           // frozen-generator steps (all levels)

  PropagationTally& operator+=(const PropagationTally& o);
};

/// Propagator U(t0 -> t1; k) = T exp(-i int (H + k L)) for one kernel node.
/// Construction caches whatever the backend can reuse across calls with the
/// same k (eigendecompositions for constant generators), so it is the unit
/// of work the solver hands to each thread.
class NodePropagator {
 public:
  NodePropagator(const TimeDependentGenerator& gen, double k,
                 PropagatorBackend backend);
  ~NodePropagator();
  NodePropagator(NodePropagator&&) noexcept;
  NodePropagator& operator=(NodePropagator&&) noexcept;

  /// Applies U(t0 -> t1) to every column of `state`.
  ComplexMatrix apply(double t0, double t1, const ComplexMatrix& state,
                      PropagationTally* tally = nullptr) const;

  double k() const { return k_; }

 private:
  struct Cache;
  const TimeDependentGenerator* gen_;
  double k_;
  PropagatorBackend backend_;
  std::unique_ptr<Cache> cache_;
};

ComplexVector propagate(const TimeDependentGenerator& gen, double k, double t0,
                        double t1, const PropagatorBackend& backend,
                        const ComplexVector& state,
                        PropagationTally* tally = nullptr);

ComplexMatrix propagate(const TimeDependentGenerator& gen, double k, double t0,
                        double t1, const PropagatorBackend& backend,
                        const ComplexMatrix& state,
                        PropagationTally* tally = nullptr);

/// exp(-i L k t1) T exp(-i int H_I(s; k) ds) exp(i L k t0) with
/// H_I(s; k) = exp(i L k s) H(s) exp(-i L k s). The conjugations are O(N)
/// phase multiplications; the interior is integrated by exact stepping.
ComplexMatrix interaction_picture_propagate(const MatrixFunction& hamiltonian,
                                            bool hamiltonian_constant,
                                            const RealVector& dissipation,
                                            double k, double t0, double t1,
                                            double tol,
                                            const ComplexMatrix& state,
                                            PropagationTally* tally = nullptr);

}  // namespace lchs
