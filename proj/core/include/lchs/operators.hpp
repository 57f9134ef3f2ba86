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

#include <limits>
#include <optional>
#include <vector>

#include "lchs/types.hpp"

namespace lchs {

/// A = L + iH with L = (A + A^dagger)/2 and H = (A - A^dagger)/(2i).
struct HermitianSplit {
  ComplexMatrix dissipative;  // L
  ComplexMatrix hamiltonian;  // H
};

HermitianSplit hermitian_split(const ComplexMatrix& a);

/// Largest singular value.
double spectral_norm(const ComplexMatrix& m);

/// Smallest eigenvalue of the Hermitian part of m (m is assumed Hermitian).
double min_hermitian_eigenvalue(const ComplexMatrix& m);

/// max |m_ij - conj(m_ji)|
double hermiticity_defect(const ComplexMatrix& m);

bool is_diagonal(const ComplexMatrix& m, double tol = 0.0);

/// Uniform samples of [0, horizon] including both endpoints.
std::vector<double> uniform_grid(double horizon, std::size_t intervals);

/// 128 intervals plus endpoints; the default sampling for shifts and norms.
std::vector<double> default_time_grid(double horizon);

/// Structural facts about a generator that backends may exploit.
struct GeneratorTraits {
  bool time_independent = false;
  /// L(t) is diagonal and constant in time (fast-forwardable dissipation).
  bool diagonal_dissipation = false;
  /// Highest derivative order known to exist.
  int smoothness = std::numeric_limits<int>::max();
};

/// A(t) on [0, T] together with its Hermitian split. Immutable; evaluators are
/// pure, so a generator can be shared across threads.
class TimeDependentGenerator {
 public:
  TimeDependentGenerator(Index dim, double horizon, MatrixFunction a,
                         GeneratorTraits traits = {});

  /// Builds A(t) = L(t) + i H(t) from Hermitian parts. Both parts are checked
  /// for Hermiticity at t = 0 and t = T.
  static TimeDependentGenerator from_parts(Index dim, double horizon,
                                           MatrixFunction dissipative,
                                           MatrixFunction hamiltonian,
                                           GeneratorTraits traits = {});

  /// Constant A.
  static TimeDependentGenerator constant(const ComplexMatrix& a, double horizon);

  Index dim() const { return dim_; }
  double horizon() const { return horizon_; }
  const GeneratorTraits& traits() const { return traits_; }
  bool time_independent() const { return traits_.time_independent; }
  bool has_diagonal_dissipation() const { return traits_.diagonal_dissipation; }

  ComplexMatrix a(double t) const { return a_(t); }
  ComplexMatrix dissipative(double t) const { return l_(t); }
  ComplexMatrix hamiltonian(double t) const { return h_(t); }

  const MatrixFunction& a_function() const { return a_; }
  const MatrixFunction& dissipative_function() const { return l_; }
  const MatrixFunction& hamiltonian_function() const { return h_; }

  /// Diagonal of L; only meaningful with diagonal_dissipation.
  RealVector dissipation_diagonal() const;

  /// A(t) + c I.
  TimeDependentGenerator shifted(double c) const;

  /// Same evaluators on a different horizon.
  TimeDependentGenerator with_horizon(double horizon) const;

 private:
  TimeDependentGenerator(Index dim, double horizon, MatrixFunction a,
                         MatrixFunction l, MatrixFunction h,
                         GeneratorTraits traits);

  Index dim_;
  double horizon_;
  MatrixFunction a_;
  MatrixFunction l_;
  MatrixFunction h_;
  GeneratorTraits traits_;
};

struct ShiftSpec {
  bool automatic = true;
  double value = 0.0;
};

/// du/dt = -A(t) u + b(t), u(0) = u0.
struct ProblemInstance {
  TimeDependentGenerator generator;
  ComplexVector initial_state;
  std::optional<VectorFunction> source;
  ShiftSpec shift;

  Index dim() const { return generator.dim(); }
  /// Throws DimensionError if u0 does not match the generator.
  void validate() const;
};

struct ShiftedGenerator {
  TimeDependentGenerator generator;
  /// c such that L(t) + c I is positive semidefinite on the sampling grid.
  /// Solutions of the shifted problem are multiplied by exp(c t) to recover u.
  double shift;
};

/// c = -min_t lambda_min(L(t)) over the grid; returns A(t) + c I.
ShiftedGenerator spectral_shift(const TimeDependentGenerator& gen,
                                const std::vector<double>& grid);

/// Central finite-difference step for the q-th derivative on horizon T.
double derivative_step(double horizon, int q);

/// Entry q (q = 0..p) is max over the grid of ||H^(q)(t)|| + ||L^(q)(t)||.
std::vector<double> derivative_norms(const TimeDependentGenerator& gen, int p,
                                     const std::vector<double>& grid);

/// Gamma_p = max_q (D_q)^(1/(q+1)) from the output of derivative_norms.
double gamma_parameter(const std::vector<double>& derivative_maxima);

/// Lambda_p: (p+1)-th root of the sum, over all 2^(p+1) choices of operators
/// from {H, L}, of the spectral norms of [X_p, [..., [X_1, X_0]]].
double nested_commutator_sum(const ComplexMatrix& h, const ComplexMatrix& l,
                             int p);

}  // namespace lchs
