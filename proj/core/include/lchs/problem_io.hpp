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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lchs/operators.hpp"

namespace lchs {

/// Scalar time profile f(t) multiplying a constant matrix or vector term.
/// Text forms: "const", "poly:c0,c1,...", "sin:freq,phase".
class TimeProfile {
 public:
  enum class Kind { Constant, Polynomial, Sine };

  static TimeProfile parse(const std::string& text);
  static TimeProfile constant() { return TimeProfile{Kind::Constant, {}}; }
  static TimeProfile polynomial(std::vector<double> coeffs);
  static TimeProfile sine(double freq, double phase);

  double operator()(double t) const;
  Kind kind() const { return kind_; }
  std::string to_string() const;

 private:
  TimeProfile(Kind kind, std::vector<double> params)
      : kind_(kind), params_(std::move(params)) {}
  Kind kind_;
  std::vector<double> params_;
};

struct MatrixTerm {
  ComplexMatrix matrix;
  TimeProfile profile = TimeProfile::constant();
};

struct VectorTerm {
  ComplexVector vector;
  TimeProfile profile = TimeProfile::constant();
};

/// Parsed form of the JSON problem file. Keeps the terms so the problem can
/// be written back out unchanged.
struct ProblemSpec {
  Index dim = 0;
  double horizon = 0.0;
  std::vector<MatrixTerm> terms;
  ComplexVector initial_state;
  std::vector<VectorTerm> source;
  ShiftSpec shift;

  ProblemInstance instance() const;
};

/// Checks required keys and shapes; throws ValidationError with the offending
/// path.
void validate_problem_json(const nlohmann::json& j);

ProblemSpec problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const ProblemSpec& spec);
ProblemSpec load_problem(const std::string& path);

/// [[re, im], ...] flat row-major, or rows of [re, im] pairs.
ComplexMatrix matrix_from_json(const nlohmann::json& j, Index dim);
nlohmann::json matrix_to_json(const ComplexMatrix& m);
/// [[re, im], ...] or plain reals.
ComplexVector vector_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const ComplexVector& v);

/// Seeded random instances for tests, sweeps and the CLI.
struct RandomInstanceOptions {
  std::uint64_t seed = 1;
  Index dim = 4;
  double horizon = 1.0;
  double hamiltonian_norm = 1.0;   // cap on ||H(t)||
  double dissipation_norm = 1.0;   // cap on ||L(t)||
  bool time_dependent = false;
  /// Number of exact zero eigenvalues of L(t) (shared, time-independent
  /// kernel). Zero gives a strictly positive L.
  Index dissipation_null_dim = 0;
  bool with_source = false;
};

/// L(t) = V D(t) V^dagger with a fixed random unitary V and nonnegative
/// diagonal D(t); H(t) = H0 + sin(t) H1. Both parts are rescaled to the caps.
ProblemSpec random_problem(const RandomInstanceOptions& options);

ComplexMatrix random_hermitian(Index dim, double norm, std::uint64_t seed);
ComplexMatrix random_matrix(Index dim, std::uint64_t seed);
ComplexVector random_unit_vector(Index dim, std::uint64_t seed);

}  // namespace lchs
