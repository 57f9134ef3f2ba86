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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lchs/operators.hpp"

namespace lchs {

enum class PlanMode { TimeDependent, TimeIndependent, Cap };

PlanMode parse_plan_mode(const std::string& text);  // "td", "ti", "cap"
std::string to_string(PlanMode mode);

/// Multipliers for the asymptotic formulas. All default to 1.
struct PlanConstants {
  double matrix_queries = 1.0;
  double state_preparation = 1.0;
  double ancilla = 1.0;
  double one_qubit_gates = 1.0;
  double trotter_steps = 1.0;
  double cutoff = 1.0;
  double nodes = 1.0;

  static PlanConstants from_json(const nlohmann::json& j);
  bool all_unit() const;
};

/// Norms and problem data the formulas consume.
struct PlanInputs {
  double l_norm = 0.0;  // max_t ||L(t)||
  double h_norm = 0.0;  // max_t ||H(t)||
  double source_l1 = 0.0;  // ||b||_{L^1}
  double source_c2 = 0.0;  // ||b||_{C^2}
  double horizon = 1.0;
  double eps = 1e-2;
  int order = 1;
  double initial_norm = 1.0;
  double final_norm = 1.0;  // estimate of ||u(T)||
  /// max_t ||H^(q)|| + ||L^(q)|| for q = 0..p; Gamma_p falls back to
  /// ||H|| + ||L|| when empty.
  std::vector<double> derivative_maxima;
  /// Lambda_p for time-independent mode.
  std::optional<double> commutator_scale;
  /// ||L'||, ||H'||, ||b'||, ||b''|| for the explicit M_t bound.
  double l_derivative = 0.0;
  double h_derivative = 0.0;
  double source_derivative = 0.0;
  double source_second = 0.0;
  /// Absorbing-potential data for cap mode.
  Index grid_points = 0;
  double real_potential_max = 0.0;
  double real_potential_rate = 0.0;  // max_t ||V_R'(t)||
  double absorber_max = 0.0;         // ||V_I||
};

/// Parameters from the explicit (non-asymptotic) error bounds the solver uses.
struct ExplicitParameters {
  double cutoff = 0.0;
  int intervals = 0;
  int time_intervals = 0;  // 0 without a source
  std::uint64_t propagator_calls = 0;
};

struct ResourcePlan {
  PlanMode mode = PlanMode::TimeDependent;
  PlanInputs inputs;
  PlanConstants constants;
  double gamma = 0.0;   // Gamma_p
  double lambda = 0.0;  // Lambda_p (time-independent mode)
  double q = 0.0;       // (||u0|| + ||b||_{L^1}) / ||u(T)||
  /// Analytic parameters with the given constants.
  double cutoff = 0.0;         // K
  double intervals = 0.0;      // M
  double time_intervals = 0.0;  // M_t, 0 without a source
  std::uint64_t trotter_steps = 0;  // r
  double matrix_queries = 0.0;
  double state_preparations = 0.0;
  std::uint64_t state_preparation_count = 0;  // ceil of the above
  std::uint64_t ancilla_qubits = 0;
  double one_qubit_gates = 0.0;
  std::uint64_t select_oracle_cost = 0;  // for M + 1 terms
  ExplicitParameters explicit_bounds;
  std::string label;
};

ResourcePlan plan(const PlanInputs& inputs, PlanMode mode,
                  const PlanConstants& constants = {});

/// Fills norms from a problem instance. final_norm must be supplied by the
/// caller (for example from an oracle solve).
PlanInputs plan_inputs(const ProblemInstance& problem, double eps, int order,
                       double final_norm);

/// ceil(log2 J) controlled queries to build a select oracle over J terms.
std::uint64_t select_oracle_cost(std::uint64_t terms);

struct MethodComparison {
  std::string method;
  double state_preparation_factor = 0.0;
  /// Matrix-query scaling in ||A|| T; absent where no scaling is quoted.
  std::optional<double> matrix_query_factor;
  std::string note;
};

/// LCHS vs QLSA-based Dyson series vs time marching at the plan's numbers.
/// These are quoted asymptotic scalings, not measurements.
std::vector<MethodComparison> compare_methods(const ResourcePlan& plan);

nlohmann::json to_json(const ResourcePlan& plan);
nlohmann::json to_json(const std::vector<MethodComparison>& table);
/// Aligned two-column text table of the plan.
std::string format_table(const ResourcePlan& plan);

}  // namespace lchs
