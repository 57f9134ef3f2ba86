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

#include "lchs/resource_planner.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string_view>

#include "lchs/kernel_quadrature.hpp"

namespace lchs {
namespace {

// ln with the argument clamped at e, so every log factor is at least 1.
double log_factor(double x) { return std::log(std::max(x, std::exp(1.0))); }

std::uint64_t ceil_count(double x) {
  if (!(x < 1.8e19)) throw BudgetError("predicted count overflows 64 bits");
  return static_cast<std::uint64_t>(std::ceil(std::max(x, 0.0)));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("plan: " + what);
}

void validate(const PlanInputs& in, PlanMode mode) {
  auto finite_nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  require(in.eps > 0.0 && in.eps < 1.0, "eps must lie in (0, 1)");
  require(in.order >= 1, "order must be at least 1");
  require(std::isfinite(in.horizon) && in.horizon > 0.0, "horizon must be positive");
  require(finite_nonneg(in.l_norm) && finite_nonneg(in.h_norm), "missing operator norms");
  require(finite_nonneg(in.source_l1) && finite_nonneg(in.source_c2), "missing source norms");
  require(finite_nonneg(in.initial_norm), "missing ||u0||");
  require(std::isfinite(in.final_norm) && in.final_norm > 0.0,
          "missing or zero ||u(T)|| estimate");
  require(in.initial_norm + in.source_l1 > 0.0, "initial state and source are both zero");
  for (double d : in.derivative_maxima) require(finite_nonneg(d), "bad derivative norm");
  if (mode == PlanMode::TimeIndependent)
    require(in.commutator_scale && finite_nonneg(*in.commutator_scale),
            "time-independent mode needs the nested commutator scale");
  if (mode == PlanMode::Cap) {
    require(in.grid_points > 0, "cap mode needs the grid size");
    require(finite_nonneg(in.real_potential_max) && finite_nonneg(in.real_potential_rate) &&
                finite_nonneg(in.absorber_max),
            "cap mode needs potential norms");
  }
}

ExplicitParameters explicit_parameters(const PlanInputs& in) {
  ExplicitParameters e;
  const double eps = std::min(0.5, in.eps / 3.0);
  const bool has_source = in.source_l1 > 0.0;
  try {
    e.cutoff = has_source ? truncation_cutoff(eps, CutoffMode::Inhomogeneous, in.source_l1)
                          : truncation_cutoff(eps);
    e.intervals = node_count_homogeneous(in.l_norm, in.horizon, eps, e.cutoff);
    e.propagator_calls = static_cast<std::uint64_t>(e.intervals) + 1;
    if (has_source) {
      SourceNorms n;
      n.h_norm = in.h_norm;
      n.l_norm = in.l_norm;
      n.h_derivative = std::max(in.h_derivative, 0.0);
      n.l_derivative = std::max(in.l_derivative, 0.0);
      n.b_norm = in.source_c2;
      n.b_derivative = std::max(in.source_derivative, 0.0);
      n.b_second = std::max(in.source_second, 0.0);
      e.time_intervals = node_count_time(n, e.cutoff, in.horizon, eps);
      e.propagator_calls *= static_cast<std::uint64_t>(e.time_intervals) + 1;
    }
  } catch (const BudgetError&) {
    e = ExplicitParameters{};  // beyond desk scale; reported as zeros
  }
  return e;
}

}  // namespace

PlanMode parse_plan_mode(const std::string& text) {
  if (text == "td") return PlanMode::TimeDependent;
  if (text == "ti") return PlanMode::TimeIndependent;
  if (text == "cap") return PlanMode::Cap;
  throw ValidationError("unknown plan mode '" + text + "' (td, ti, cap)");
}

std::string to_string(PlanMode mode) {
  switch (mode) {
    case PlanMode::TimeDependent:
      return "td";
    case PlanMode::TimeIndependent:
      return "ti";
    case PlanMode::Cap:
      return "cap";
  }
  return "?";
}

PlanConstants PlanConstants::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("constants: expected an object");
  static constexpr std::array<std::string_view, 7> kKeys = {
      "matrix_queries", "state_preparation", "ancilla", "one_qubit_gates",
      "trotter_steps",  "cutoff",            "nodes"};
  for (const auto& [key, value] : j.items())
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
      throw ValidationError("constants: unknown key '" + key + "'");
  PlanConstants c;
  auto read = [&j](const char* key, double& field) {
    if (!j.contains(key)) return;
    if (!j[key].is_number() || !(j[key].get<double>() > 0.0))
      throw ValidationError(std::string("constants.") + key + ": expected a positive number");
    field = j[key].get<double>();
  };
  read("matrix_queries", c.matrix_queries);
  read("state_preparation", c.state_preparation);
  read("ancilla", c.ancilla);
  read("one_qubit_gates", c.one_qubit_gates);
  read("trotter_steps", c.trotter_steps);
  read("cutoff", c.cutoff);
  read("nodes", c.nodes);
  return c;
}

bool PlanConstants::all_unit() const {
  return matrix_queries == 1.0 && state_preparation == 1.0 && ancilla == 1.0 &&
         one_qubit_gates == 1.0 && trotter_steps == 1.0 && cutoff == 1.0 && nodes == 1.0;
}

std::uint64_t select_oracle_cost(std::uint64_t terms) {
  if (terms < 1) throw PreconditionError("select oracle needs at least one term");
  return static_cast<std::uint64_t>(std::bit_width(terms - 1));
}

ResourcePlan plan(const PlanInputs& in, PlanMode mode, const PlanConstants& k) {
  validate(in, mode);
  ResourcePlan p;
  p.mode = mode;
  p.inputs = in;
  p.constants = k;
  const double eps = in.eps;
  const double t = in.horizon;
  const double pw = in.order;
  const double e1 = 1.0 + 1.0 / pw;
  const double e2 = 1.0 + 2.0 / pw;
  const bool has_source = in.source_l1 > 0.0;

  p.q = (in.initial_norm + in.source_l1) / in.final_norm;
  p.gamma = std::max(gamma_parameter(in.derivative_maxima), in.h_norm + in.l_norm);
  p.lambda = in.commutator_scale.value_or(0.0);
  p.cutoff = k.cutoff * p.q / eps;
  p.intervals = std::max(1.0, k.nodes * in.l_norm * t / (eps * eps));
  if (has_source) {
    const double c1 = in.h_norm + in.l_norm + in.h_derivative + in.l_derivative;
    p.time_intervals =
        std::max(1.0, k.nodes * c1 * in.source_c2 * in.source_c2 * t * t * t / (eps * eps));
  }

  double steps = 0.0;  // r before rounding
  switch (mode) {
    case PlanMode::TimeDependent:
      steps = std::pow(p.gamma * t, e1) * std::pow(p.q / eps, e2);
      break;
    case PlanMode::TimeIndependent:
      steps = std::pow(p.lambda * t, e1) * std::pow(p.q / eps, e1);
      break;
    case PlanMode::Cap: {
      // Truncated Dyson series in the interaction picture: alpha_H T segments.
      const double n = static_cast<double>(in.grid_points);
      const double h_cap = n * n + in.real_potential_max;
      steps = h_cap * t;
      p.intervals = std::max(1.0, k.nodes * in.absorber_max * t / (eps * eps));
      p.matrix_queries = k.matrix_queries * p.q * h_cap * t *
                         log_factor(p.q * h_cap * t / eps) *
                         log_factor(t * (n + in.real_potential_rate) / eps) *
                         log_factor(in.absorber_max * t / eps);
      break;
    }
  }
  steps *= k.trotter_steps;
  p.trotter_steps = std::max<std::uint64_t>(1, ceil_count(steps));
  if (mode != PlanMode::Cap) p.matrix_queries = k.matrix_queries * p.q * std::max(1.0, steps);

  p.state_preparations = k.state_preparation * p.q;
  p.state_preparation_count = ceil_count(p.state_preparations);

  double ancilla_arg = 0.0;
  if (mode == PlanMode::Cap) {
    ancilla_arg = p.q * in.absorber_max * t / eps;
  } else {
    ancilla_arg = p.q * in.l_norm * t / eps;
    if (has_source) {
      std::vector<double> first(in.derivative_maxima.begin(),
                                in.derivative_maxima.begin() +
                                    std::min<std::size_t>(2, in.derivative_maxima.size()));
      const double gamma1 = std::max(gamma_parameter(first), in.h_norm + in.l_norm);
      ancilla_arg = std::max(ancilla_arg, gamma1 * in.source_c2 * t / eps);
    }
  }
  p.ancilla_qubits = ceil_count(k.ancilla * std::log2(std::max(2.0, ancilla_arg))) +
                     (has_source ? 1 : 0);
  p.one_qubit_gates = has_source ? k.one_qubit_gates * p.q : 0.0;
  p.select_oracle_cost = select_oracle_cost(ceil_count(p.intervals) + 1);
  p.explicit_bounds = explicit_parameters(in);
  p.label = k.all_unit() ? "analytic bound, constants=1"
                         : "analytic bound, constants from override";
  return p;
}

PlanInputs plan_inputs(const ProblemInstance& problem, double eps, int order,
                       double final_norm) {
  problem.validate();
  const auto& gen = problem.generator;
  const double horizon = gen.horizon();
  const std::vector<double> grid = default_time_grid(horizon);
  PlanInputs in;
  in.eps = eps;
  in.order = order;
  in.horizon = horizon;
  in.initial_norm = problem.initial_state.norm();
  in.final_norm = final_norm;
  in.derivative_maxima = derivative_norms(gen, order, grid);
  const double h1 = derivative_step(horizon, 1);
  const double h2 = derivative_step(horizon, 2);
  for (double t : grid) {
    in.l_norm = std::max(in.l_norm, spectral_norm(gen.dissipative(t)));
    in.h_norm = std::max(in.h_norm, spectral_norm(gen.hamiltonian(t)));
    if (!gen.time_independent()) {
      in.l_derivative = std::max(
          in.l_derivative,
          spectral_norm(gen.dissipative(t + 0.5 * h1) - gen.dissipative(t - 0.5 * h1)) / h1);
      in.h_derivative = std::max(
          in.h_derivative,
          spectral_norm(gen.hamiltonian(t + 0.5 * h1) - gen.hamiltonian(t - 0.5 * h1)) / h1);
    }
    if (gen.time_independent() && t > 0.0) break;
  }
  if (gen.time_independent())
    in.commutator_scale =
        nested_commutator_sum(gen.hamiltonian(0.0), gen.dissipative(0.0), order);
  if (problem.source) {
    const auto& b = *problem.source;
    const double step = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double s = grid[i];
      const double nb = b(s).norm();
      const bool end = i == 0 || i + 1 == grid.size();
      in.source_l1 += (end ? 0.5 : 1.0) * step * nb;
      b0 = std::max(b0, nb);
      b1 = std::max(b1, (b(s + 0.5 * h1) - b(s - 0.5 * h1)).norm() / h1);
      b2 = std::max(b2, (b(s + h2) - 2.0 * b(s) + b(s - h2)).norm() / (h2 * h2));
    }
    in.source_c2 = b0 + b1 + b2;
    in.source_derivative = b1;
    in.source_second = b2;
  }
  return in;
}

std::vector<MethodComparison> compare_methods(const ResourcePlan& plan) {
  const PlanInputs& in = plan.inputs;
  double a_norm = in.l_norm + in.h_norm;
  if (plan.mode == PlanMode::Cap) {
    const double n = static_cast<double>(in.grid_points);
    a_norm = n * n + in.real_potential_max + in.absorber_max;
  }
  const double at = a_norm * in.horizon;
  const double log_eps = std::max(1.0, std::log(1.0 / in.eps));
  const double pw = in.order;
  return {
      {"LCHS", plan.q, std::pow(at, 1.0 + 1.0 / pw),
       "state preparation O(q); matrix queries (||A|| T)^(1+1/p)"},
      {"QLSA Dyson series", plan.q * at * log_eps, std::nullopt,
       "state preparation O(q ||A|| T log(1/eps))"},
      {"time marching", plan.q, at * at,
       "state preparation O(q); matrix queries (||A|| T)^2"},
  };
}

nlohmann::json to_json(const ResourcePlan& p) {
  const PlanInputs& in = p.inputs;
  nlohmann::json inputs{{"l_norm", in.l_norm},
                        {"h_norm", in.h_norm},
                        {"source_l1", in.source_l1},
                        {"source_c2", in.source_c2},
                        {"T", in.horizon},
                        {"eps", in.eps},
                        {"order", in.order},
                        {"initial_norm", in.initial_norm},
                        {"final_norm", in.final_norm},
                        {"derivative_maxima", in.derivative_maxima}};
  if (p.mode == PlanMode::Cap) {
    inputs["grid_points"] = in.grid_points;
    inputs["real_potential_max"] = in.real_potential_max;
    inputs["real_potential_rate"] = in.real_potential_rate;
    inputs["absorber_max"] = in.absorber_max;
  }
  return {{"mode", to_string(p.mode)},
          {"label", p.label},
          {"inputs", inputs},
          {"gamma", p.gamma},
          {"lambda", p.lambda},
          {"q", p.q},
          {"analytic",
           {{"K", p.cutoff},
            {"M", p.intervals},
            {"M_t", p.time_intervals},
            {"r", p.trotter_steps},
            {"matrix_queries", p.matrix_queries},
            {"state_preparations", p.state_preparations},
            {"state_preparation_count", p.state_preparation_count},
            {"ancilla_qubits", p.ancilla_qubits},
            {"one_qubit_gates", p.one_qubit_gates},
            {"select_oracle_cost", p.select_oracle_cost}}},
          {"explicit",
           {{"K", p.explicit_bounds.cutoff},
            {"M", p.explicit_bounds.intervals},
            {"M_t", p.explicit_bounds.time_intervals},
            {"propagator_calls", p.explicit_bounds.propagator_calls}}}};
}

nlohmann::json to_json(const std::vector<MethodComparison>& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table) {
    nlohmann::json r{{"method", row.method},
                     {"state_preparation_factor", row.state_preparation_factor},
                     {"note", row.note},
                     {"kind", "quoted asymptotic scaling, not a measurement"}};
    r["matrix_query_factor"] =
        row.matrix_query_factor ? nlohmann::json(*row.matrix_query_factor) : nlohmann::json();
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_table(const ResourcePlan& p) {
  std::ostringstream os;
  os << std::setprecision(6);
  auto line = [&os](const std::string& name, auto value) {
    os << std::left << std::setw(28) << name << value << "\n";
  };
  os << "# " << p.label << " (mode " << to_string(p.mode) << ")\n";
  line("q", p.q);
  line("Gamma_p", p.gamma);
  if (p.mode == PlanMode::TimeIndependent) line("Lambda_p", p.lambda);
  line("K", p.cutoff);
  line("M", p.intervals);
  if (p.time_intervals > 0.0) line("M_t", p.time_intervals);
  line("r", p.trotter_steps);
  line("matrix queries", p.matrix_queries);
  line("state preparations", p.state_preparation_count);
  line("ancilla qubits", p.ancilla_qubits);
  line("one-qubit gates", p.one_qubit_gates);
  line("select oracle cost", p.select_oracle_cost);
  os << "# explicit bounds\n";
  line("K", p.explicit_bounds.cutoff);
  line("M", p.explicit_bounds.intervals);
  if (p.explicit_bounds.time_intervals) line("M_t", p.explicit_bounds.time_intervals);
  line("propagator calls", p.explicit_bounds.propagator_calls);
  return os.str();
}

}  // namespace lchs
