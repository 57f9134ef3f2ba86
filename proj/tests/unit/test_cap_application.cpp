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

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "lchs/cap_application.hpp"

using namespace lchs;

namespace {

double spectral_norm_oracle(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

TEST_CASE("kinetic matrix on a unit-spaced grid") {
  const ComplexMatrix t = kinetic_matrix(4, 1.0);
  for (Index i = 0; i < 4; ++i) CHECK(t(i, i) == Complex(1.0));
  for (Index i = 0; i + 1 < 4; ++i) {
    CHECK(t(i, i + 1) == Complex(-0.5));
    CHECK(t(i + 1, i) == Complex(-0.5));
  }
  CHECK(t(0, 2) == Complex(0.0));
  CHECK(t(0, 3) == Complex(0.0));
  CHECK(make_cap_grid(4, 4.0).spacing == 1.0);
}

TEST_CASE("kinetic spectrum matches the Dirichlet closed form") {
  for (Index n : {5, 12, 33}) {
    const double h = 3.0 / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(kinetic_matrix(n, h));
    RealVector expected(n);
    for (Index m = 1; m <= n; ++m)
      expected[m - 1] = (1.0 - std::cos(std::numbers::pi * m / (n + 1.0))) / (h * h);
    std::sort(expected.begin(), expected.end());
    CHECK((es.eigenvalues() - expected).cwiseAbs().maxCoeff() < 1e-10 / (h * h));
  }
}

TEST_CASE("generator norm bound") {
  const Index n = 24;
  const double length = 6.0, vr = 3.0;
  const CapGrid g = make_cap_grid(n, length);
  const CapProblem cap = discretize(
      n, length, [&](double x, double) { return vr * std::sin(x) * std::sin(x); },
      RealVector::Zero(n), 1.0);
  const double h = g.spacing;
  const ComplexMatrix a = cap.generator.a(0.3);
  CHECK(spectral_norm_oracle(a) <= 2.0 * (1.0 / (h * h) + vr));
  CHECK(cap.generator.traits().diagonal_dissipation);
  CHECK(cap.generator.traits().time_independent);
}

TEST_CASE("gaussian packet") {
  const CapGrid g = make_cap_grid(64, 10.0);
  const ComplexVector u = gaussian_packet(g, 5.0, 0.0, 0.7);
  CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-14));
  for (Index i = 0; i < u.size(); ++i) {
    CHECK(u[i].imag() == 0.0);
    CHECK(u[i].real() >= 0.0);
  }
  const ComplexVector moving = gaussian_packet(g, 5.0, 2.0, 0.7);
  CHECK(moving.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(moving.cwiseAbs().isApprox(u.cwiseAbs(), 1e-14));
  CHECK_THROWS_AS(gaussian_packet(g, 5.0, 0.0, 0.0), PreconditionError);
}

TEST_CASE("absorber profile") {
  const CapGrid g = make_cap_grid(100, 10.0);
  const RealVector v = absorber_profile(g, 2.0, 5.0, 2);
  CHECK(v.minCoeff() >= 0.0);
  // First cell center sits at h/2 from the wall.
  const double edge = 5.0 * std::pow((2.0 - 0.05) / 2.0, 2);
  CHECK(v[0] == doctest::Approx(edge));
  CHECK(v[99] == doctest::Approx(edge));
  CHECK(v[0] <= 5.0);
  for (Index i = 0; i < 100; ++i)
    if (g.x[i] >= 2.0 && g.x[i] <= 8.0) CHECK(v[i] == 0.0);
  CHECK(absorber_profile(g, 2.0, 0.0, 2).isZero());
  CHECK_THROWS_AS(absorber_profile(g, 0.0, 1.0, 2), PreconditionError);
  CHECK_THROWS_AS(absorber_profile(g, 5.0, 1.0, 2), PreconditionError);
  CHECK_THROWS_AS(absorber_profile(g, 2.0, -1.0, 2), PreconditionError);
  CHECK_THROWS_AS(absorber_profile(g, 2.0, 1.0, 0), PreconditionError);
}

TEST_CASE("discretize rejects bad absorbers") {
  RealVector bad = RealVector::Zero(8);
  bad[3] = -0.1;
  CHECK_THROWS_AS(discretize(8, 2.0, nullptr, bad, 1.0), PreconditionError);
  CHECK_THROWS_AS(discretize(8, 2.0, nullptr, RealVector::Zero(7), 1.0), DimensionError);
  CHECK_THROWS_AS(make_cap_grid(3, 1.0), PreconditionError);
  CHECK_THROWS_AS(make_cap_grid(8, -1.0), PreconditionError);
}

TEST_CASE("free particle conserves norm") {
  const Index n = 16;
  const CapProblem cap = discretize(n, 8.0, nullptr, RealVector::Zero(n), 1.0);
  const ComplexVector u0 = gaussian_packet(cap.grid, 4.0, 1.0, 0.8);
  const CapDemoResult r = run_cap_demo(cap, u0, 1.0, 1e-3, ExactStepping{}, {0.0, 0.5, 1.0});
  REQUIRE(r.snapshots.size() == 3);
  CHECK(r.snapshots[0].norm == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& s : r.snapshots) {
    CHECK(std::abs(s.norm - 1.0) < 1e-3);
    CHECK(std::abs(s.oracle_norm - 1.0) < 1e-8);
    CHECK(s.error < 1e-3);
  }
}

TEST_CASE("absorbed packet loses norm monotonically") {
  const Index n = 24;
  const CapGrid g = make_cap_grid(n, 8.0);
  const CapProblem cap = discretize(n, 8.0, nullptr, absorber_profile(g, 2.5, 4.0, 2), 1.5);
  const ComplexVector u0 = gaussian_packet(cap.grid, 4.0, 2.0, 0.7);
  const CapDemoResult r =
      run_cap_demo(cap, u0, 1.5, 1e-2, ExactStepping{}, {0.5, 1.0, 1.5});
  CHECK(r.oracle_norm_increase <= 1e-12);
  double previous = 1.0;
  for (const auto& s : r.snapshots) {
    CHECK(s.oracle_norm <= previous + 1e-12);
    CHECK(s.error < 1e-2);
    previous = s.oracle_norm;
  }
  CHECK(r.snapshots.back().oracle_norm < 0.99);
  const auto j = to_json(r);
  CHECK(j["snapshots"].size() == 3);
  CHECK(j["snapshots"][0]["density"].size() == static_cast<std::size_t>(n));
}

TEST_CASE("fully absorbed packet is reported") {
  const Index n = 8;
  const CapProblem cap = discretize(n, 4.0, nullptr, RealVector::Constant(n, 50.0), 1.0);
  const ComplexVector u0 = gaussian_packet(cap.grid, 2.0, 0.0, 0.5);
  CHECK_THROWS_AS(run_cap_demo(cap, u0, 1.0, 1e-2, ExactStepping{}, {1.0}),
                  DecayedSolutionError);
}

TEST_CASE("cap demo preconditions") {
  const Index n = 8;
  const CapProblem cap = discretize(n, 4.0, nullptr, RealVector::Zero(n), 1.0);
  const ComplexVector u0 = gaussian_packet(cap.grid, 2.0, 0.0, 0.5);
  CHECK_THROWS_AS(run_cap_demo(cap, ComplexVector::Ones(3), 1.0, 1e-2, ExactStepping{}, {}),
                  DimensionError);
  CHECK_THROWS_AS(run_cap_demo(cap, u0, 2.0, 1e-2, ExactStepping{}, {}), PreconditionError);
  CHECK_THROWS_AS(run_cap_demo(cap, u0, 1.0, 1e-2, ExactStepping{}, {1.5}), PreconditionError);
}
