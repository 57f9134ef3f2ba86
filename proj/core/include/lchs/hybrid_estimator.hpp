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

/// Sample and shot budget for estimating u(T)^dagger O u(T).
struct EstimatorPlan {
  double eps = 0.0;
  double delta = 0.0;
  std::uint64_t samples = 0;  // J
  double circuit_eps = 0.0;   // eps / (2 ||c||_1^2)
  double circuit_delta = 0.0;  // delta / (2 J)
  double observable_norm = 0.0;
  double block_encoding_factor = 0.0;  // alpha_O >= ||O||
  std::uint64_t shots = 0;             // per Hadamard test, per part
  /// Queries an amplitude-estimation circuit would spend per part,
  /// ceil(alpha_O / circuit_eps). Reported, not emulated.
  std::uint64_t amplitude_estimation_queries = 0;
};

/// Samples above this cap raise BudgetError.
inline constexpr std::uint64_t kMaxSamples = 100'000'000;

/// J = ceil(8 ||c||^4 (||O|| + 1)^2 ln(4/delta) / eps^2) and shots
/// ceil((5 alpha_O / circuit_eps)^2).
EstimatorPlan plan_estimator(double coefficient_l1, double observable_norm,
                             double eps, double delta);

/// Smallest power of two not below the norm, and at least 1.
double block_encoding_factor(double observable_norm);

/// <u0| U_k^dagger O U_k' |u0> with u0 normalized on entry.
Complex correlation_function(const TimeDependentGenerator& gen,
                             const ComplexVector& u0, double k, double kp,
                             const ComplexMatrix& observable, double horizon,
                             const PropagatorBackend& backend);

/// Ancilla-statistics emulation of the non-unitary Hadamard test: each of the
/// real and imaginary parts is alpha (2 X / shots - 1) with
/// X ~ Binomial(shots, (1 + part / alpha) / 2).
Complex hadamard_test_emulate(Complex value, double alpha, std::uint64_t shots,
                              std::uint64_t seed);

struct SampleRecord {
  double k = 0.0;
  double kp = 0.0;
  double estimate = 0.0;  // real part of the sampled correlation
};

struct ObservableEstimate {
  double value = 0.0;
  double half_width = 0.0;  // Hoeffding half-width
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  EstimatorPlan plan;
  KernelGrid grid;
  std::vector<SampleRecord> records;
  std::uint64_t propagator_calls = 0;
};

struct EstimatorOptions {
  PropagatorBackend backend = ExactStepping{};
  std::optional<double> cutoff;
  std::optional<int> intervals;
  /// Keep per-sample records (memory grows with J).
  bool keep_records = true;
  /// Replace shot sampling with the exact correlation value.
  bool exact_correlations = false;
};

/// Monte-Carlo estimate of ||c||_1^2 E[corr(k, k')] with pairs drawn from
/// c_k c_k' / ||c||_1^2, scaled by ||u0||^2 so the estimand is u(T)^dagger O
/// u(T) for the unnormalized solution. Requires a problem without source and
/// with L(t) positive semidefinite.
ObservableEstimate estimate_observable(const ProblemInstance& problem,
                                       const ComplexMatrix& observable,
                                       double horizon, double eps,
                                       double delta, std::uint64_t seed,
                                       const EstimatorOptions& options = {});

/// sum_{k,k'} c_k c_k' corr(k, k') ||u0||^2 on the given grid, by full
/// enumeration.
double enumerate_observable(const ProblemInstance& problem,
                            const ComplexMatrix& observable, double horizon,
                            const KernelGrid& grid,
                            const PropagatorBackend& backend);

nlohmann::json to_json(const EstimatorPlan& plan);
nlohmann::json to_json(const ObservableEstimate& estimate,
                       bool include_records = false);

}  // namespace lchs
