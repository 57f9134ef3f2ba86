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

#include "lchs/hybrid_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "lchs/lchs_solver.hpp"
#include "lchs/parallel.hpp"

namespace lchs {
namespace {

constexpr std::size_t kChunk = 4096;

void require_unit_interval(double x, const char* name) {
  if (!(x > 0.0) || !(x < 1.0))
    throw PreconditionError(std::string(name) + " must lie in (0, 1)");
}

void require_observable(const ComplexMatrix& o, Index dim) {
  if (o.rows() != dim || o.cols() != dim)
    throw DimensionError("observable must be " + std::to_string(dim) + "x" +
                         std::to_string(dim));
  const double scale = 1.0 + o.cwiseAbs().maxCoeff();
  if (hermiticity_defect(o) > 1e-10 * scale)
    throw PreconditionError("observable must be Hermitian");
}

// alpha (2 X / shots - 1), X ~ Binomial(shots, (1 + part / alpha) / 2).
double sample_part(double part, double alpha, std::uint64_t shots,
                   std::mt19937_64& rng) {
  const double p = std::clamp(0.5 * (1.0 + part / alpha), 0.0, 1.0);
  std::binomial_distribution<std::uint64_t> binomial(shots, p);
  const double x = static_cast<double>(binomial(rng));
  return alpha * (2.0 * x / static_cast<double>(shots) - 1.0);
}

// U_k u0 for every node, with u0 normalized.
struct NodeStates {
  KernelGrid grid;
  std::vector<ComplexVector> psi;  // U_k u0 / ||u0||
  std::vector<ComplexVector> phi;  // O psi
  double shift = 0.0;
  std::uint64_t propagations = 0;
};

NodeStates node_states(const ProblemInstance& problem, const ComplexMatrix& observable,
                       double horizon, double grid_eps,
                       const EstimatorOptions& options) {
  const ShiftedGenerator prep = prepare_generator(problem, horizon);
  const ComplexVector u0 = problem.initial_state / problem.initial_state.norm();
  PropagatorBackend backend = options.backend;
  std::visit(
      [grid_eps](auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (!std::is_same_v<B, Trotter>) {
          if (b.tolerance <= 0.0) b.tolerance = grid_eps / 3.0;
        }
      },
      backend);
  auto node = [&](double k) {
    return NodePropagator(prep.generator, k, backend).apply(0.0, horizon, u0);
  };
  NodeStates out;
  out.shift = prep.shift;
  const double cutoff = options.cutoff.value_or(truncation_cutoff(grid_eps / 3.0));
  std::vector<ComplexMatrix> values;
  if (options.intervals) {
    out.grid = build_kernel_grid(cutoff, *options.intervals);
    values.resize(out.grid.size());
    parallel_for(values.size(), [&](std::size_t j) { values[j] = node(out.grid.nodes[j]); });
  } else {
    AdaptiveQuadrature q = adaptive_kernel_quadrature(
        cutoff, initial_adaptive_intervals(cutoff), grid_eps / 3.0, node);
    out.grid = std::move(q.grid);
    values = std::move(q.node_values);
  }
  out.propagations = values.size();
  out.psi.resize(values.size());
  out.phi.resize(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    out.psi[j] = values[j].col(0);
    out.phi[j] = observable * out.psi[j];
  }
  return out;
}

}  // namespace

double block_encoding_factor(double observable_norm) {
  if (!(observable_norm >= 0.0)) throw PreconditionError("norm must be nonnegative");
  if (observable_norm <= 1.0) return 1.0;
  return std::exp2(std::ceil(std::log2(observable_norm)));
}

EstimatorPlan plan_estimator(double coefficient_l1, double observable_norm,
                             double eps, double delta) {
  require_unit_interval(eps, "eps");
  require_unit_interval(delta, "delta");
  if (!(coefficient_l1 > 0.0)) throw PreconditionError("||c||_1 must be positive");
  EstimatorPlan p;
  p.eps = eps;
  p.delta = delta;
  p.observable_norm = observable_norm;
  const double c2 = coefficient_l1 * coefficient_l1;
  const double j = std::ceil(8.0 * c2 * c2 * std::pow(observable_norm + 1.0, 2) *
                             std::log(4.0 / delta) / (eps * eps));
  if (!(j <= static_cast<double>(kMaxSamples)))
    throw BudgetError("estimator needs " + std::to_string(j) + " samples, cap is " +
                      std::to_string(kMaxSamples));
  p.samples = static_cast<std::uint64_t>(j);
  p.circuit_eps = eps / (2.0 * c2);
  p.circuit_delta = delta / (2.0 * j);
  p.block_encoding_factor = block_encoding_factor(observable_norm);
  p.shots = static_cast<std::uint64_t>(
      std::ceil(std::pow(5.0 * p.block_encoding_factor / p.circuit_eps, 2)));
  p.amplitude_estimation_queries =
      static_cast<std::uint64_t>(std::ceil(p.block_encoding_factor / p.circuit_eps));
  return p;
}

Complex correlation_function(const TimeDependentGenerator& gen, const ComplexVector& u0,
                             double k, double kp, const ComplexMatrix& observable,
                             double horizon, const PropagatorBackend& backend) {
  const double norm = u0.norm();
  if (norm == 0.0) throw PreconditionError("initial state is zero");
  if (u0.size() != gen.dim()) throw DimensionError("initial state has the wrong size");
  if (observable.rows() != gen.dim() || observable.cols() != gen.dim())
    throw DimensionError("observable has the wrong shape");
  const ComplexVector unit = u0 / norm;
  const ComplexVector left = propagate(gen, k, 0.0, horizon, backend, unit);
  const ComplexVector right = propagate(gen, kp, 0.0, horizon, backend, unit);
  return left.dot(observable * right);  // dot conjugates the left argument
}

Complex hadamard_test_emulate(Complex value, double alpha, std::uint64_t shots,
                              std::uint64_t seed) {
  if (!(alpha > 0.0)) throw PreconditionError("alpha must be positive");
  if (shots < 1) throw PreconditionError("need at least one shot");
  if (std::abs(value) > alpha * (1.0 + 1e-12))
    throw PreconditionError("|value| exceeds the block-encoding factor");
  std::seed_seq seq{seed};
  std::mt19937_64 rng(seq);
  const double re = sample_part(value.real(), alpha, shots, rng);
  const double im = sample_part(value.imag(), alpha, shots, rng);
  return {re, im};
}

ObservableEstimate estimate_observable(const ProblemInstance& problem,
                                       const ComplexMatrix& observable, double horizon,
                                       double eps, double delta, std::uint64_t seed,
                                       const EstimatorOptions& options) {
  require_unit_interval(eps, "eps");
  require_unit_interval(delta, "delta");
  problem.validate();
  if (problem.source)
    throw PreconditionError("the hybrid estimator handles problems without a source");
  const double u0_norm = problem.initial_state.norm();
  if (u0_norm == 0.0) throw PreconditionError("initial state is zero");
  require_observable(observable, problem.dim());

  const double o_norm = spectral_norm(observable);
  const double grid_eps = std::min(0.5, eps / (4.0 * (o_norm + 1.0)));
  NodeStates nodes = node_states(problem, observable, horizon, grid_eps, options);
  const KernelGrid& grid = nodes.grid;

  ObservableEstimate est;
  est.seed = seed;
  est.grid = grid;
  est.plan = plan_estimator(grid.l1_norm, o_norm, eps, delta);
  est.samples = est.plan.samples;
  est.propagator_calls = nodes.propagations;
  const double alpha = est.plan.block_encoding_factor;

  const std::size_t total = est.samples;
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  std::vector<double> chunk_sums(chunks);
  std::vector<SampleRecord> records(options.keep_records ? total : 0);
  parallel_for(chunks, [&](std::size_t c) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(c)};
    std::mt19937_64 rng(seq);
    std::discrete_distribution<std::size_t> pick(grid.coefficients.begin(),
                                                 grid.coefficients.end());
    const std::size_t lo = c * kChunk, hi = std::min(total, lo + kChunk);
    std::vector<double> values;
    values.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      const std::size_t j = pick(rng);
      const std::size_t jp = pick(rng);
      const double exact = nodes.psi[j].dot(nodes.phi[jp]).real();
      const double v = options.exact_correlations
                           ? exact
                           : sample_part(exact, alpha, est.plan.shots, rng);
      values.push_back(v);
      if (options.keep_records) records[i] = {grid.nodes[j], grid.nodes[jp], v};
    }
    chunk_sums[c] = pairwise_sum(std::span<const double>(values));
  });
  const double mean = pairwise_sum(std::span<const double>(chunk_sums)) /
                      static_cast<double>(total);
  const double growth = std::exp(2.0 * nodes.shift * horizon);
  const double c2 = grid.l1_norm * grid.l1_norm;
  const double scale = growth * u0_norm * u0_norm;
  est.value = c2 * mean * scale;
  est.half_width = scale * (c2 * (o_norm + 1.0) *
                                std::sqrt(2.0 * std::log(4.0 / delta) / total) +
                            c2 * est.plan.circuit_eps);
  est.records = std::move(records);
  return est;
}

double enumerate_observable(const ProblemInstance& problem, const ComplexMatrix& observable,
                            double horizon, const KernelGrid& grid,
                            const PropagatorBackend& backend) {
  problem.validate();
  if (problem.source)
    throw PreconditionError("the hybrid estimator handles problems without a source");
  require_observable(observable, problem.dim());
  const ShiftedGenerator prep = prepare_generator(problem, horizon);
  const double u0_norm = problem.initial_state.norm();
  const ComplexVector u0 = problem.initial_state / u0_norm;
  std::vector<ComplexVector> psi(grid.size());
  parallel_for(grid.size(), [&](std::size_t j) {
    psi[j] = propagate(prep.generator, grid.nodes[j], 0.0, horizon, backend, u0);
  });
  std::vector<Complex> terms;
  terms.reserve(grid.size() * grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const ComplexVector phi_row = observable.adjoint() * psi[j];
    for (std::size_t jp = 0; jp < grid.size(); ++jp)
      terms.push_back(grid.coefficients[j] * grid.coefficients[jp] * phi_row.dot(psi[jp]));
  }
  const Complex sum = pairwise_sum(std::span<const Complex>(terms));
  return sum.real() * std::exp(2.0 * prep.shift * horizon) * u0_norm * u0_norm;
}

nlohmann::json to_json(const EstimatorPlan& p) {
  return {{"eps", p.eps},
          {"delta", p.delta},
          {"samples", p.samples},
          {"circuit_eps", p.circuit_eps},
          {"circuit_delta", p.circuit_delta},
          {"observable_norm", p.observable_norm},
          {"block_encoding_factor", p.block_encoding_factor},
          {"shots", p.shots},
          {"amplitude_estimation_queries", p.amplitude_estimation_queries}};
}

nlohmann::json to_json(const ObservableEstimate& e, bool include_records) {
  nlohmann::json j{{"value", e.value},
                   {"half_width", e.half_width},
                   {"samples", e.samples},
                   {"seed", e.seed},
                   {"shots", e.plan.shots},
                   {"plan", to_json(e.plan)},
                   {"grid", to_json(e.grid)},
                   {"tally", {{"propagator_calls", e.propagator_calls},
                              {"hadamard_tests", e.samples},
                              {"amplitude_estimation_queries",
                               e.samples * e.plan.amplitude_estimation_queries}}}};
  if (include_records) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : e.records) rows.push_back({r.k, r.kp, r.estimate});
    j["records"] = std::move(rows);
  }
  return j;
}

}  // namespace lchs
