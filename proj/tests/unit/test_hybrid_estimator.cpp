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
#include <map>
#include <numeric>
#include <vector>

#include "lchs/hybrid_estimator.hpp"
#include "lchs/operators.hpp"
#include "lchs/parallel.hpp"
#include "lchs/problem_io.hpp"
#include "lchs/propagators.hpp"
#include "lchs/reference_oracle.hpp"

using namespace lchs;

namespace {

ComplexMatrix identity(Index n) { return ComplexMatrix::Identity(n, n); }

ProblemInstance seeded(std::uint64_t seed, Index dim) {
  RandomInstanceOptions opt;
  opt.seed = seed;
  opt.dim = dim;
  return random_problem(opt).instance();
}

ProblemInstance scalar_decay() {
  return {TimeDependentGenerator::constant(ComplexMatrix::Constant(1, 1, 1.0), 1.0),
          ComplexVector::Ones(1), std::nullopt, {}};
}

}  // namespace

TEST_CASE("plan_estimator satisfies the Hoeffding sample count") {
  for (double c1 : {0.6, 0.99}) {
    for (double o : {0.5, 3.0}) {
      const EstimatorPlan p = plan_estimator(c1, o, 0.05, 0.1);
      const double needed = 8.0 * std::pow(c1, 4) * std::pow(o + 1.0, 2) * std::log(40.0) / 0.0025;
      CHECK(static_cast<double>(p.samples) >= needed);
      CHECK(p.circuit_eps == doctest::Approx(0.05 / (2 * c1 * c1)));
      CHECK(p.circuit_delta == doctest::Approx(0.1 / (2.0 * static_cast<double>(p.samples))));
      CHECK(p.block_encoding_factor >= o);
      CHECK(p.shots == static_cast<std::uint64_t>(
                           std::ceil(std::pow(5 * p.block_encoding_factor / p.circuit_eps, 2))));
    }
  }
  CHECK(block_encoding_factor(0.3) == 1.0);
  CHECK(block_encoding_factor(3.0) == 4.0);
  CHECK(block_encoding_factor(4.0) == 4.0);
  CHECK_THROWS_AS(plan_estimator(1.0, 1.0, 1e-5, 0.1), BudgetError);
  CHECK_THROWS_AS(plan_estimator(1.0, 1.0, 0.0, 0.1), PreconditionError);
  CHECK_THROWS_AS(plan_estimator(1.0, 1.0, 0.1, 1.0), PreconditionError);
}

TEST_CASE("correlation_function examples") {
  const auto p = seeded(3, 3);
  const ComplexVector u0 = random_unit_vector(3, 4);
  const ExactStepping backend{1e-11};
  CHECK(std::abs(correlation_function(p.generator, u0, 2.0, 2.0, identity(3), 1.0, backend) - 1.0) <
        1e-9);

  const auto unitary = TimeDependentGenerator::constant(kI * random_hermitian(3, 1.0, 5), 1.0);
  for (double k : {-4.0, 0.0, 9.0})
    CHECK(std::abs(correlation_function(unitary, u0, k, -k, identity(3), 1.0, backend) - 1.0) < 1e-9);

  const ComplexMatrix o = random_hermitian(3, 1.0, 6);
  const Complex a = correlation_function(p.generator, u0, 1.5, -3.0, o, 1.0, backend);
  const Complex b = correlation_function(p.generator, u0, -3.0, 1.5, o, 1.0, backend);
  CHECK(std::abs(a - std::conj(b)) < 1e-12);
}

TEST_CASE("hadamard_test_emulate examples") {
  // Re circuit: ancilla reads 0 with certainty. The Im circuit stays a fair coin.
  CHECK(hadamard_test_emulate(1.0, 1.0, 17, 3).real() == 1.0);
  CHECK(hadamard_test_emulate(Complex(0.0, 1.0), 1.0, 17, 3).imag() == 1.0);

  SUBCASE("unbiased coin") {
    const std::uint64_t shots = 100;
    double sum = 0.0, sum2 = 0.0;
    const int trials = 4000;
    for (int s = 0; s < trials; ++s) {
      const double x = hadamard_test_emulate(0.0, 1.0, shots, s).real();
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / trials;
    const double sd = std::sqrt(sum2 / trials - mean * mean);
    CHECK(std::abs(mean) < 4.0 * 0.1 / std::sqrt(trials));
    CHECK(sd == doctest::Approx(0.1).epsilon(0.05));
  }
  SUBCASE("concentration") {
    const Complex v(0.6, 0.2);
    const double alpha = 2.0;
    const std::uint64_t shots = 1'000'000;
    int inside = 0;
    for (int s = 0; s < 100; ++s)
      inside += std::abs(hadamard_test_emulate(v, alpha, shots, 500 + s) - v) <=
                5.0 * alpha / std::sqrt(static_cast<double>(shots));
    CHECK(inside >= 99);
  }
  CHECK(hadamard_test_emulate(0.3, 1.0, 1000, 9) == hadamard_test_emulate(0.3, 1.0, 1000, 9));
  CHECK_THROWS_AS(hadamard_test_emulate(1.5, 1.0, 10, 1), PreconditionError);
  CHECK_THROWS_AS(hadamard_test_emulate(0.5, 1.0, 0, 1), PreconditionError);
  CHECK_THROWS_AS(hadamard_test_emulate(0.5, 0.0, 10, 1), PreconditionError);
}

TEST_CASE("estimate with trivial dynamics is the coefficient mass squared") {
  const ProblemInstance p{TimeDependentGenerator::constant(ComplexMatrix::Zero(2, 2), 1.0),
                          random_unit_vector(2, 1), std::nullopt, {}};
  const ObservableEstimate e = estimate_observable(p, identity(2), 1.0, 0.1, 0.1, 11);
  const double c2 = e.grid.l1_norm * e.grid.l1_norm;
  CHECK(e.value == doctest::Approx(c2).epsilon(1e-12));
}

TEST_CASE("estimate of the scalar decay") {
  const auto p = scalar_decay();
  const ObservableEstimate e = estimate_observable(p, identity(1), 1.0, 0.05, 0.1, 2);
  CHECK(std::abs(e.value - std::exp(-2.0)) <= 0.05);
  CHECK(std::abs(e.value) <= e.grid.l1_norm * e.grid.l1_norm * (1.0 + e.plan.circuit_eps));
}

TEST_CASE("enumeration matches a direct double sum") {
  const auto p = seeded(77, 3);
  const ComplexMatrix o = random_hermitian(3, 1.0, 78);
  const KernelGrid grid = build_kernel_grid(4.0, 8);
  const ExactStepping backend{1e-12};
  std::vector<ComplexVector> psi;
  const ComplexVector u0 = p.initial_state / p.initial_state.norm();
  for (double k : grid.nodes) psi.push_back(propagate(p.generator, k, 0.0, 1.0, backend, u0));
  Complex direct = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    for (std::size_t jp = 0; jp < grid.size(); ++jp)
      direct += grid.coefficients[j] * grid.coefficients[jp] * psi[j].dot(o * psi[jp]);
  const double expected = direct.real() * p.initial_state.squaredNorm();
  CHECK(std::abs(enumerate_observable(p, o, 1.0, grid, backend) - expected) < 1e-12);

  EstimatorOptions opt;
  opt.cutoff = 4.0;
  opt.intervals = 8;
  opt.exact_correlations = true;
  const ObservableEstimate e = estimate_observable(p, o, 1.0, 0.05, 0.1, 3, opt);
  CHECK(std::abs(e.value - expected) <= e.half_width);
}

TEST_CASE("pair sampling follows the product distribution") {
  const auto p = scalar_decay();
  EstimatorOptions opt;
  opt.cutoff = 4.0;
  opt.intervals = 8;
  opt.exact_correlations = true;
  const ObservableEstimate e = estimate_observable(p, identity(1), 1.0, 0.015, 0.1, 99, opt);
  REQUIRE(e.records.size() >= 100000);
  std::map<std::pair<double, double>, double> counts;
  for (const auto& r : e.records) counts[{r.k, r.kp}] += 1.0;
  const double n = static_cast<double>(e.records.size());
  const double l1 = e.grid.l1_norm;
  int outside = 0;
  for (std::size_t j = 0; j < e.grid.size(); ++j) {
    for (std::size_t jp = 0; jp < e.grid.size(); ++jp) {
      const double prob = e.grid.coefficients[j] * e.grid.coefficients[jp] / (l1 * l1);
      const double observed = counts[{e.grid.nodes[j], e.grid.nodes[jp]}];
      const double sigma = std::sqrt(n * prob * (1.0 - prob));
      outside += std::abs(observed - n * prob) > 3.0 * sigma;
    }
  }
  CHECK(outside == 0);
}

TEST_CASE("estimates are seed- and thread-count deterministic") {
  const auto p = seeded(8, 2);
  const ComplexMatrix o = random_hermitian(2, 1.0, 9);
  const std::size_t saved = thread_count();
  set_thread_count(1);
  const ObservableEstimate a = estimate_observable(p, o, 1.0, 0.1, 0.1, 42);
  set_thread_count(4);
  const ObservableEstimate b = estimate_observable(p, o, 1.0, 0.1, 0.1, 42);
  set_thread_count(saved);
  CHECK(a.value == b.value);
  REQUIRE(a.records.size() == b.records.size());
  bool same = true;
  for (std::size_t i = 0; i < a.records.size(); ++i)
    same = same && a.records[i].k == b.records[i].k && a.records[i].kp == b.records[i].kp &&
           a.records[i].estimate == b.records[i].estimate;
  CHECK(same);
  const ObservableEstimate c = estimate_observable(p, o, 1.0, 0.1, 0.1, 43);
  CHECK(c.value != a.value);
}

TEST_CASE("estimator preconditions") {
  auto p = seeded(8, 2);
  CHECK_THROWS_AS(estimate_observable(p, random_matrix(2, 1), 1.0, 0.1, 0.1, 1), PreconditionError);
  CHECK_THROWS_AS(estimate_observable(p, identity(3), 1.0, 0.1, 0.1, 1), DimensionError);
  p.source = [](double) { return ComplexVector(ComplexVector::Ones(2)); };
  CHECK_THROWS_AS(estimate_observable(p, identity(2), 1.0, 0.1, 0.1, 1), PreconditionError);
}
