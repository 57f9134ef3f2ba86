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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "lchs/kernel_quadrature.hpp"
#include "lchs/operators.hpp"
#include "lchs/problem_io.hpp"
#include "lchs/reference_oracle.hpp"

using namespace lchs;

namespace {

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix identity(Index n) { return ComplexMatrix::Identity(n, n); }

TimeDependentGenerator random_td(std::uint64_t seed, Index dim) {
  RandomInstanceOptions opt;
  opt.seed = seed;
  opt.dim = dim;
  opt.time_dependent = true;
  return random_problem(opt).instance().generator;
}

}  // namespace

TEST_CASE("time_ordered_exp of a zero generator is the identity") {
  const auto gen = TimeDependentGenerator::constant(ComplexMatrix::Zero(3, 3), 1.0);
  CHECK((time_ordered_exp(gen, 0.0, 1.0, 1e-10) - identity(3)).norm() < 1e-14);
}

TEST_CASE("time_ordered_exp of a scalar decay") {
  const auto gen = TimeDependentGenerator::constant(ComplexMatrix::Constant(1, 1, 1.0), 1.0);
  const ComplexMatrix w = time_ordered_exp(gen, 0.0, 1.0, 1e-10);
  CHECK(std::abs(w(0, 0) - 0.3678794412) < 1e-9);
}

TEST_CASE("time_ordered_exp of a Hamiltonian flow is unitary") {
  const double tol = 1e-9;
  const auto gen = TimeDependentGenerator::constant(kI * random_hermitian(4, 2.0, 3), 1.0);
  const ComplexMatrix w = time_ordered_exp(gen, 0.0, 1.0, tol);
  CHECK((w.adjoint() * w - identity(4)).norm() <= 10 * tol);
}

TEST_CASE("time_ordered_exp matches the matrix exponential for constant A") {
  const ComplexMatrix a = random_matrix(5, 17);
  const auto gen = TimeDependentGenerator::constant(a, 1.0);
  const ComplexMatrix expected = (-0.7 * a).exp();
  CHECK((time_ordered_exp(gen, 0.2, 0.9, 1e-11) - expected).norm() < 1e-9);
}

TEST_CASE("time_ordered_exp composes") {
  const double tol = 1e-10;
  const auto gen = random_td(8, 4);
  const ComplexMatrix w01 = time_ordered_exp(gen, 0.0, 0.4, tol);
  const ComplexMatrix w12 = time_ordered_exp(gen, 0.4, 1.0, tol);
  const ComplexMatrix w02 = time_ordered_exp(gen, 0.0, 1.0, tol);
  CHECK((w12 * w01 - w02).norm() <= 10 * tol);
}

TEST_CASE("time_ordered_exp contracts norms when L is semidefinite") {
  const double tol = 1e-10;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto gen = random_td(seed, 4);
    const ComplexVector u0 = random_unit_vector(4, seed + 50);
    const ComplexVector u = time_ordered_exp(gen, 0.0, 1.0, tol) * u0;
    CHECK(u.norm() <= 1.0 + 10 * tol);
  }
}

TEST_CASE("time_ordered_exp reports non-convergence") {
  const auto gen = TimeDependentGenerator::constant(kI * 1e4 * pauli_z(), 1.0);
  OracleConfig cfg;
  cfg.tolerance = 1e-14;
  cfg.max_halvings = 2;
  CHECK_THROWS_AS(time_ordered_exp(gen, 0.0, 1.0, cfg), ConvergenceError);
}

TEST_CASE("hermitian_propagator_exact examples") {
  CHECK((hermitian_propagator_exact(ComplexMatrix::Zero(3, 3), 1.3) - identity(3)).norm() ==
        0.0);
  CHECK((hermitian_propagator_exact(pauli_z(), std::numbers::pi) + identity(2)).norm() < 1e-15);

  const ComplexMatrix h = random_hermitian(8, 1.0, 5);
  const auto gen = TimeDependentGenerator::constant(kI * h, 1.0);
  CHECK((hermitian_propagator_exact(h, 0.3) - time_ordered_exp(gen, 0.0, 0.3, 1e-10)).norm() <
        1e-8);
}

TEST_CASE("hermitian_propagator_exact is unitary and inverted by -s") {
  const ComplexMatrix h = random_hermitian(6, 3.0, 21);
  const ComplexMatrix u = hermitian_propagator_exact(h, 0.8);
  CHECK((u.adjoint() * u - identity(6)).norm() < 1e-12);
  CHECK((u * hermitian_propagator_exact(h, -0.8) - identity(6)).norm() < 1e-12);
  CHECK_THROWS_AS(hermitian_propagator_exact(random_matrix(3, 1), 1.0), PreconditionError);
}

TEST_CASE("verify_lchs_identity on the scalar decay") {
  const auto gen = TimeDependentGenerator::constant(ComplexMatrix::Constant(1, 1, 1.0), 1.0);
  const auto check = verify_lchs_identity(gen, 1.0, 100.0, 20000, 1e-12, IdentityRhs::ExactBackend);
  CHECK(check.lhs_rhs_error <= 1e-2);
  CHECK(check.truncation_bound == doctest::Approx(kernel_tail(100.0)));
}

TEST_CASE("verify_lchs_identity at zero horizon reduces to the weight deficit") {
  const ComplexMatrix a = 2.0 * identity(3) + kI * random_hermitian(3, 1.0, 4);
  const auto gen = TimeDependentGenerator::constant(a, 1.0);
  const auto check = verify_lchs_identity(gen, 0.0, 20.0, 400, 1e-10, IdentityRhs::ExactBackend);
  CHECK(check.lhs_rhs_error == doctest::Approx(check.weight_deficit).epsilon(1e-9));
}

TEST_CASE("verify_principal_value residuals decrease with the radius") {
  const ComplexMatrix h = ComplexMatrix::Zero(1, 1);
  const ComplexMatrix l = ComplexMatrix::Constant(1, 1, 1.0);
  const double r1 = verify_principal_value(h, l, 1e2);
  const double r2 = verify_principal_value(h, l, 1e3);
  const double r3 = verify_principal_value(h, l, 1e4);
  CHECK(r2 < r1);
  CHECK(r3 < r2);
}

TEST_CASE("verify_principal_value follows the square-root envelope") {
  const ComplexMatrix h = pauli_z();
  const ComplexMatrix l = identity(2) + 0.5 * pauli_x();
  const double r = verify_principal_value(h, l, 1e3);
  CHECK(r * std::sqrt(1e3) < 10.0);
}

TEST_CASE("verify_principal_value is resolved by its default node count") {
  const ComplexMatrix h = pauli_z();
  const ComplexMatrix l = identity(2) + 0.5 * pauli_x();
  const long nodes = default_principal_value_nodes(h, l, 50.0);
  const double coarse = verify_principal_value(h, l, 50.0, nodes);
  const double fine = verify_principal_value(h, l, 50.0, 2 * nodes);
  CHECK(std::abs(coarse - fine) < 1e-3 * fine);
}

TEST_CASE("verify_principal_value rejects indefinite L") {
  CHECK_THROWS_AS(verify_principal_value(pauli_z(), pauli_x(), 10.0), PreconditionError);
}

TEST_CASE("oracle_solve of the scalar source problem") {
  ProblemInstance p{TimeDependentGenerator::constant(ComplexMatrix::Constant(1, 1, 1.0), 1.0),
                    ComplexVector::Ones(1),
                    VectorFunction([](double) { return ComplexVector(ComplexVector::Ones(1)); }),
                    {}};
  CHECK(std::abs(oracle_solve(p, 1.0)(0) - 1.0) < 1e-9);
}
