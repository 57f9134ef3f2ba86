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
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "lchs/cap_application.hpp"
#include "lchs/operators.hpp"
#include "lchs/problem_io.hpp"
#include "lchs/propagators.hpp"
#include "lchs/reference_oracle.hpp"
#include "lchs/statistics.hpp"

using namespace lchs;

namespace {

ComplexMatrix identity(Index n) { return ComplexMatrix::Identity(n, n); }

// exp(-i (H + k L) t) by Eigen's Pade-based exponential.
ComplexMatrix frozen_flow(const ComplexMatrix& h, const ComplexMatrix& l, double k, double t) {
  return ComplexMatrix(-kI * t * (h + k * l)).exp();
}

TimeDependentGenerator constant_parts(const ComplexMatrix& l, const ComplexMatrix& h,
                                      double horizon = 1.0) {
  return TimeDependentGenerator::constant(l + kI * h, horizon);
}

TimeDependentGenerator smooth_td(std::uint64_t seed, Index dim) {
  RandomInstanceOptions opt;
  opt.seed = seed;
  opt.dim = dim;
  opt.time_dependent = true;
  return random_problem(opt).instance().generator;
}

double trotter_slope(const TimeDependentGenerator& gen, double k, int order,
                     const std::vector<double>& steps) {
  const Index n = gen.dim();
  const ComplexMatrix reference = propagate(gen, k, 0.0, 1.0, ExactStepping{1e-12}, identity(n));
  std::vector<double> errors;
  for (double r : steps) {
    const ComplexMatrix u = propagate(gen, k, 0.0, 1.0, Trotter{suzuki_recursion(order), static_cast<int>(r)},
                                      identity(n));
    errors.push_back(spectral_norm(u - reference));
  }
  return fit_log_log(steps, errors).slope;
}

}  // namespace

TEST_CASE("suzuki_recursion coefficients") {
  SUBCASE("p = 1") {
    const auto f = suzuki_recursion(1);
    REQUIRE(f.stage_count() == 1);
    CHECK(f.stages[0].l_coeff == 1.0);
    CHECK(f.stages[0].h_coeff == 1.0);
  }
  SUBCASE("p = 2 is Strang") {
    const auto f = suzuki_recursion(2);
    REQUIRE(f.stage_count() == 2);
    CHECK(f.stages[0].l_coeff == 0.0);
    CHECK(f.stages[0].h_coeff == 0.5);
    CHECK(f.stages[1].l_coeff == 1.0);
    CHECK(f.stages[1].h_coeff == 0.5);
  }
  SUBCASE("p = 4 Suzuki constants") {
    CHECK(suzuki_weight() == doctest::Approx(0.4144907717).epsilon(1e-10));
    CHECK(1.0 - 4.0 * suzuki_weight() == doctest::Approx(-0.6579630871).epsilon(1e-10));
    CHECK(suzuki_recursion(4).stage_count() == 10);
  }
  for (int p : {1, 2, 4}) {
    double alpha = 0.0, beta = 0.0;
    for (const auto& st : suzuki_recursion(p).stages) {
      alpha += st.l_coeff;
      beta += st.h_coeff;
      CHECK(st.l_offset >= -1e-15);
      CHECK(st.h_offset <= 1.0 + 1e-15);
    }
    CHECK(alpha == doctest::Approx(1.0));
    CHECK(beta == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(suzuki_recursion(3), PreconditionError);
}

TEST_CASE("parse_backend round trip") {
  CHECK(std::holds_alternative<ExactStepping>(parse_backend("exact")));
  CHECK(std::get<ExactStepping>(parse_backend("exact:1e-6")).tolerance == 1e-6);
  const auto t = std::get<Trotter>(parse_backend("trotter:4,32"));
  CHECK(t.formula.order == 4);
  CHECK(t.steps == 32);
  CHECK(describe(parse_backend("trotter:2,64")) == "trotter:2,64");
  CHECK(describe(parse_backend("interaction")) == "interaction");
  CHECK_THROWS_AS(parse_backend("trotter:2"), ValidationError);
  CHECK_THROWS_AS(parse_backend("trotter:2,0"), ValidationError);
  CHECK_THROWS_AS(parse_backend("trotter:3,8"), ValidationError);
  CHECK_THROWS_AS(parse_backend("exact:abc"), ValidationError);
  CHECK_THROWS_AS(parse_backend("rk4"), ValidationError);
}

TEST_CASE("k = 0 collapses to evolution under H") {
  const ComplexMatrix h = random_hermitian(4, 1.5, 1);
  const ComplexMatrix l = random_hermitian(4, 1.0, 2);
  const auto gen = constant_parts(l, h);
  const ComplexVector u0 = random_unit_vector(4, 3);
  const ComplexVector expected = hermitian_propagator_exact(h, 0.7) * u0;
  for (const PropagatorBackend& b : {PropagatorBackend(ExactStepping{}),
                                     PropagatorBackend(Trotter{suzuki_recursion(2), 3})}) {
    CHECK((propagate(gen, 0.0, 0.1, 0.8, b, u0) - expected).norm() < 1e-10);
  }
}

TEST_CASE("Trotter is exact for commuting parts") {
  ComplexMatrix h = ComplexMatrix::Constant(1, 1, 0.7);
  ComplexMatrix l = ComplexMatrix::Constant(1, 1, 1.3);
  const auto gen = constant_parts(l, h);
  const ComplexVector u0 = ComplexVector::Ones(1);
  const Complex expected = std::exp(-kI * (0.7 + 3.0 * 1.3) * 1.0);
  for (int p : {1, 2, 4})
    for (int r : {1, 5})
      CHECK(std::abs(propagate(gen, 3.0, 0.0, 1.0, Trotter{suzuki_recursion(p), r}, u0)(0) -
                     expected) < 1e-13);
}

TEST_CASE("ExactStepping matches the exact exponential for constant generators") {
  const ComplexMatrix h = random_hermitian(5, 2.0, 7);
  const ComplexMatrix l = random_hermitian(5, 1.0, 8);
  const auto gen = constant_parts(l, h);
  CHECK((propagate(gen, 2.5, 0.0, 1.2, ExactStepping{}, identity(5)) - frozen_flow(h, l, 2.5, 1.2))
            .norm() < 1e-12);
}

TEST_CASE("ExactStepping matches the RK4 oracle on time-dependent generators") {
  const auto gen = smooth_td(4, 4);
  for (double k : {-5.0, 0.0, 3.0}) {
    const double tol = 1e-9;
    const ComplexMatrix u = propagate(gen, k, 0.0, 1.0, ExactStepping{tol}, identity(4));
    const ComplexMatrix w = hamiltonian_flow_oracle(gen, k, 0.0, 1.0, 1e-11);
    CHECK((u - w).norm() < 10 * tol);
  }
}

TEST_CASE("Trotter order on a constant 4x4 pair") {
  const auto gen = constant_parts(random_hermitian(4, 1.0, 11), random_hermitian(4, 1.0, 12));
  const std::vector<double> r{8, 16, 32, 64, 128};
  CHECK(trotter_slope(gen, 3.0, 2, r) == doctest::Approx(-2.0).epsilon(0.1));
  CHECK(trotter_slope(gen, 3.0, 1, r) == doctest::Approx(-1.0).epsilon(0.25));
}

TEST_CASE("Trotter order on a smooth time-dependent instance") {
  const auto gen = smooth_td(9, 3);
  const std::vector<double> r{8, 16, 32, 64, 128};
  CHECK(std::abs(trotter_slope(gen, 2.0, 2, r) + 2.0) <= 0.25);
  CHECK(std::abs(trotter_slope(gen, 2.0, 1, r) + 1.0) <= 0.25);
  CHECK(std::abs(trotter_slope(gen, 2.0, 4, {2, 4, 8, 16, 32}) + 4.0) <= 0.25);
}

TEST_CASE("every backend preserves the norm") {
  const auto gen = smooth_td(21, 4);
  const ComplexVector u0 = random_unit_vector(4, 22);
  const double tol = 1e-9;
  for (const PropagatorBackend& b : {PropagatorBackend(ExactStepping{tol}),
                                     PropagatorBackend(Trotter{suzuki_recursion(1), 7}),
                                     PropagatorBackend(Trotter{suzuki_recursion(4), 3})}) {
    const double n = propagate(gen, 4.0, 0.0, 1.0, b, u0).norm();
    CHECK(std::abs(n - 1.0) <= 10 * tol);
  }
}

TEST_CASE("ExactStepping composes") {
  const auto gen = smooth_td(30, 3);
  const double tol = 1e-10;
  const ComplexVector u0 = random_unit_vector(3, 31);
  const ComplexVector a = propagate(gen, 1.5, 0.0, 0.3, ExactStepping{tol}, u0);
  const ComplexVector b = propagate(gen, 1.5, 0.3, 1.0, ExactStepping{tol}, a);
  const ComplexVector c = propagate(gen, 1.5, 0.0, 1.0, ExactStepping{tol}, u0);
  CHECK((b - c).norm() <= 3 * tol);
}

TEST_CASE("propagation tallies") {
  const auto gen = constant_parts(random_hermitian(3, 1.0, 1), random_hermitian(3, 1.0, 2));
  PropagationTally tally;
  propagate(gen, 1.0, 0.0, 1.0, Trotter{suzuki_recursion(2), 16}, identity(3), &tally);
  CHECK(tally.propagator_calls == 1);
  CHECK(tally.exponentials == 2 * 2 * 16);
}

TEST_CASE("backend preconditions") {
  const auto gen = constant_parts(random_hermitian(3, 1.0, 1), random_hermitian(3, 1.0, 2));
  CHECK_THROWS_AS(NodePropagator(gen, 1.0, Trotter{suzuki_recursion(2), 0}), PreconditionError);
  CHECK_THROWS_AS(NodePropagator(gen, 1.0, InteractionPicture{}), PreconditionError);
  CHECK_THROWS_AS(NodePropagator(gen, std::nan(""), ExactStepping{}), PreconditionError);
  CHECK_THROWS_AS(propagate(gen, 1.0, 0.0, 1.0, ExactStepping{}, ComplexVector(ComplexVector::Ones(2))),
                  DimensionError);
  ComplexVector bad = ComplexVector::Ones(3);
  bad(1) = std::nan("");
  CHECK_THROWS_AS(propagate(gen, 1.0, 0.0, 1.0, ExactStepping{}, bad), ValidationError);
}

TEST_CASE("interaction picture examples") {
  RealVector d(3);
  d << 0.0, 0.5, 2.0;
  ComplexMatrix l = ComplexMatrix::Zero(3, 3);
  l.diagonal() = d.cast<Complex>();
  const ComplexMatrix h = random_hermitian(3, 1.0, 40);
  const ComplexVector u0 = random_unit_vector(3, 41);
  auto h_fn = [&](double) { return h; };

  SUBCASE("k = 0 is direct propagation under H") {
    const ComplexMatrix out = interaction_picture_propagate(h_fn, true, d, 0.0, 0.2, 1.0, 1e-11, u0);
    CHECK((out.col(0) - hermitian_propagator_exact(h, 0.8) * u0).norm() < 1e-10);
  }
  SUBCASE("H = 0 gives pure phases") {
    auto zero = [](double) { return ComplexMatrix(ComplexMatrix::Zero(3, 3)); };
    PropagationTally tally;
    const ComplexMatrix out = interaction_picture_propagate(zero, true, d, 7.0, 0.2, 1.0, 1e-11, u0, &tally);
    for (Index i = 0; i < 3; ++i)
      CHECK(std::abs(out(i, 0) - std::exp(-kI * 7.0 * d(i) * 0.8) * u0(i)) < 1e-13);
    CHECK(tally.phase_multiplications == 6);
  }
  SUBCASE("fast-forward cost does not depend on k or s") {
    auto zero = [](double) { return ComplexMatrix(ComplexMatrix::Zero(3, 3)); };
    PropagationTally a, b;
    interaction_picture_propagate(zero, true, d, 1.0, 0.0, 0.1, 1e-11, u0, &a);
    interaction_picture_propagate(zero, true, d, 1e3, 0.0, 50.0, 1e-11, u0, &b);
    CHECK(a.phase_multiplications == b.phase_multiplications);
  }
  SUBCASE("agrees with direct propagation") {
    TimeDependentGenerator gen = TimeDependentGenerator::from_parts(
        3, 1.0, [&](double) { return l; }, h_fn, {true, true});
    for (double k : {0.0, 1.0, 10.0}) {
      const ComplexVector x = propagate(gen, k, 0.0, 1.0, InteractionPicture{1e-10}, u0);
      const ComplexVector y = propagate(gen, k, 0.0, 1.0, ExactStepping{1e-12}, u0);
      CHECK((x - y).norm() <= 1e-9);
    }
  }
  CHECK_THROWS_AS(interaction_picture_propagate(h_fn, true, d, 1.0, 0.0, 1.0, 0.0, u0), PreconditionError);
}

TEST_CASE("interaction picture on a CAP instance at k = 50") {
  const CapGrid grid = make_cap_grid(64, 40.0);
  const CapProblem cap = discretize(64, 40.0, nullptr, absorber_profile(grid, 8.0, 2.0, 2), 1.0);
  const ComplexVector u0 = gaussian_packet(cap.grid, 26.0, 2.0, 2.0);
  const ComplexVector x = propagate(cap.generator, 50.0, 0.0, 1.0, InteractionPicture{1e-10}, u0);
  const ComplexVector y = propagate(cap.generator, 50.0, 0.0, 1.0, ExactStepping{1e-12}, u0);
  CHECK((x - y).norm() <= 1e-8);
}
