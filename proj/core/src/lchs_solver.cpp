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

#include "lchs/lchs_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <string>

#include "lchs/parallel.hpp"

namespace lchs {
namespace {

void require_eps(double eps) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw PreconditionError("eps must lie in (0, 1), got " + std::to_string(eps));
}

// The solver fills an unset backend tolerance from its error budget.
PropagatorBackend with_tolerance(PropagatorBackend backend, double tol) {
  std::visit(
      [tol](auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (!std::is_same_v<B, Trotter>) {
          if (b.tolerance <= 0.0) b.tolerance = tol;
        }
      },
      backend);
  return backend;
}

bool uses_trotter(const PropagatorBackend& backend) {
  return std::holds_alternative<Trotter>(backend);
}

// Accumulates per-node tallies from worker threads.
class SharedTally {
 public:
  void add(const PropagationTally& t) {
    std::lock_guard lock(mutex_);
    total_ += t;
  }
  PropagationTally total() const { return total_; }

 private:
  std::mutex mutex_;
  PropagationTally total_;
};

void finish(LCHSResult& r, const ComplexVector& shifted_solution, double horizon,
            double eps, double reference_norm) {
  const double growth = std::exp(r.shift * horizon);
  r.solution = growth * shifted_solution;
  const double norm = r.solution.norm();
  if (!(norm >= std::max(1e-12, eps) * reference_norm) || norm == 0.0)
    throw DecayedSolutionError(
        "solution norm " + std::to_string(norm) +
        " is below what the requested accuracy resolves (reference norm " +
        std::to_string(reference_norm) + ")");
  r.normalized = r.solution / norm;
  r.success_probability = r.solution.squaredNorm() / (r.prefactor * r.prefactor);
  r.expected_repeats = static_cast<std::uint64_t>(std::ceil(r.prefactor / norm));
  r.tally.state_preparations = r.expected_repeats;
}

// Trapezoid estimate of int_0^T ||b(s)|| ds on the default grid.
double source_l1_norm(const VectorFunction& b, double horizon) {
  const std::vector<double> grid = default_time_grid(horizon);
  std::vector<double> terms(grid.size());
  const double h = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool end = i == 0 || i + 1 == grid.size();
    terms[i] = (end ? 0.5 : 1.0) * h * b(grid[i]).norm();
  }
  return pairwise_sum(std::span<const double>(terms));
}

// One node of the combined quadrature: U_k(0 -> T) u0 plus the time
// quadrature sum_j' v_j' U_k(s_j' -> T) b(s_j').
ComplexVector source_node(const TimeDependentGenerator& gen, double k,
                          const PropagatorBackend& backend, double tol,
                          const ComplexVector& u0, const DuhamelGrid& grid,
                          PropagationTally& tally) {
  const std::size_t n = grid.time_nodes.size();
  const double horizon = grid.horizon;
  if (uses_trotter(backend)) {
    NodePropagator prop(gen, k, backend);
    std::vector<ComplexVector> parts(n);
    for (std::size_t jp = 0; jp < n; ++jp) {
      ComplexVector v = grid.time_weights[jp] * grid.source_samples[jp];
      if (jp == 0) v += u0;
      parts[jp] = prop.apply(grid.time_nodes[jp], horizon, v, &tally).col(0);
    }
    return pairwise_sum(std::span<const ComplexVector>(parts));
  }
  // Horner sweep: carry [u0-flow, accumulated source] across the segments.
  // Segment tolerances are proportional to their length so the total stays
  // within tol. Constant generators reuse one cached spectrum.
  ComplexMatrix carry(u0.size(), 2);
  carry.col(0) = u0;
  carry.col(1) = grid.time_weights[0] * grid.source_samples[0];
  if (gen.time_independent() && std::holds_alternative<ExactStepping>(backend)) {
    // Uniform segments of a constant generator share one step matrix.
    const NodePropagator prop(gen, k, backend);
    const Index dim = u0.size();
    const ComplexMatrix step =
        prop.apply(0.0, horizon / static_cast<double>(n - 1), ComplexMatrix::Identity(dim, dim));
    for (std::size_t jp = 1; jp < n; ++jp) {
      carry = step * carry;
      carry.col(1) += grid.time_weights[jp] * grid.source_samples[jp];
    }
    tally.propagator_calls += n - 1;
    tally.exact_steps += n - 1;
    return carry.col(0) + carry.col(1);
  }
  for (std::size_t jp = 1; jp < n; ++jp) {
    const double s0 = grid.time_nodes[jp - 1], s1 = grid.time_nodes[jp];
    const double share = horizon > 0.0 ? (s1 - s0) / horizon : 1.0;
    NodePropagator segment(gen, k, with_tolerance(backend, tol * share));
    carry = segment.apply(s0, s1, carry, &tally);
    carry.col(1) += grid.time_weights[jp] * grid.source_samples[jp];
  }
  return carry.col(0) + carry.col(1);
}

}  // namespace

ShiftedGenerator prepare_generator(const ProblemInstance& problem, double horizon,
                                   const std::optional<std::vector<double>>& shift_grid) {
  problem.validate();
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw PreconditionError("horizon must be finite and nonnegative");
  const TimeDependentGenerator base = problem.generator.with_horizon(horizon);
  const std::vector<double> grid = shift_grid.value_or(default_time_grid(horizon));
  double c = problem.shift.value;
  if (problem.shift.automatic) c = std::max(0.0, spectral_shift(base, grid).shift);
  ShiftedGenerator out{base.shifted(c), c};
  for (double t : grid) {
    if (min_hermitian_eigenvalue(out.generator.dissipative(t)) < -1e-10)
      throw PreconditionError("L(t) + cI is not positive semidefinite at t = " +
                              std::to_string(t) + "; increase the shift");
    if (out.generator.time_independent()) break;
  }
  return out;
}

QueryTally& QueryTally::operator+=(const PropagationTally& t) {
  propagator_calls += t.propagator_calls;
  exponentials += t.exponentials;
  phase_multiplications += t.phase_multiplications;
  exact_steps += t.exact_steps;
  return *this;
}

LCHSResult solve_homogeneous(const ProblemInstance& problem, double horizon,
                             double eps, const SolverOptions& options) {
  require_eps(eps);
  const ShiftedGenerator prep = prepare_generator(problem, horizon, options.shift_grid);
  const ComplexVector& u0 = problem.initial_state;
  const double u0_norm = u0.norm();
  if (u0_norm == 0.0) throw PreconditionError("initial state is zero");

  LCHSResult r;
  r.shift = prep.shift;
  r.budget = {eps / 3.0 * u0_norm, eps / 3.0 * u0_norm, eps / 3.0 * u0_norm};
  const PropagatorBackend backend = with_tolerance(options.backend, eps / 3.0);
  const double cutoff = options.cutoff.value_or(truncation_cutoff(eps / 3.0));

  SharedTally tally;
  auto node = [&](double k) {
    PropagationTally local;
    NodePropagator prop(prep.generator, k, backend);
    ComplexMatrix out = prop.apply(0.0, horizon, u0, &local);
    tally.add(local);
    return out;
  };

  ComplexVector sum;
  if (options.intervals) {
    r.grid = build_kernel_grid(cutoff, *options.intervals);
    std::vector<ComplexVector> terms(r.grid.size());
    parallel_for(r.grid.size(), [&](std::size_t j) {
      terms[j] = r.grid.coefficients[j] * node(r.grid.nodes[j]).col(0);
    });
    sum = pairwise_sum(std::span<const ComplexVector>(terms));
  } else {
    AdaptiveQuadrature q = adaptive_kernel_quadrature(
        cutoff, initial_adaptive_intervals(cutoff), r.budget.quadrature, node);
    r.grid = std::move(q.grid);
    r.refinements = q.refinements;
    r.quadrature_change = q.last_change;
    sum = q.value.col(0);
  }
  r.tally += tally.total();

  const double growth = std::exp(prep.shift * horizon);
  r.homogeneous_prefactor = growth * r.grid.l1_norm * u0_norm;
  r.prefactor = r.homogeneous_prefactor;
  finish(r, sum, horizon, eps, u0_norm);
  return r;
}

LCHSResult solve_inhomogeneous(const ProblemInstance& problem, double horizon,
                               double eps, const SolverOptions& options) {
  require_eps(eps);
  if (!problem.source) return solve_homogeneous(problem, horizon, eps, options);
  const VectorFunction& b = *problem.source;
  const double b_l1 = source_l1_norm(b, horizon);
  if (b_l1 == 0.0) return solve_homogeneous(problem, horizon, eps, options);

  const ShiftedGenerator prep = prepare_generator(problem, horizon, options.shift_grid);
  const double c = prep.shift;
  const VectorFunction shifted_b = [b, c](double s) {
    return ComplexVector(std::exp(-c * s) * b(s));
  };
  const ComplexVector& u0 = problem.initial_state;
  const double u0_norm = u0.norm();
  const double growth = std::exp(c * horizon);

  // One pass with surrogate S for ||u(T)||: the homogeneous part gets
  // relative accuracy eps S / (4 ||u0||), the source part absolute eps S / 4.
  auto run = [&](double surrogate) {
    const double target = eps * surrogate / 2.0;
    const double eps_source = std::min(0.5, eps * surrogate / 12.0);
    double cutoff = truncation_cutoff(eps_source, CutoffMode::Inhomogeneous, b_l1);
    if (u0_norm > 0.0) {
      const double eps_hom = std::min(0.5, eps * surrogate / (12.0 * u0_norm));
      cutoff = std::max(cutoff, truncation_cutoff(eps_hom));
    }
    cutoff = options.cutoff.value_or(cutoff);

    LCHSResult r;
    r.shift = c;
    r.budget = {target / 3.0, target / 3.0, target / 3.0};
    const double tol = target / 3.0 / (u0_norm + b_l1);
    const PropagatorBackend backend = with_tolerance(options.backend, tol);

    int m = options.intervals.value_or(initial_adaptive_intervals(cutoff));
    int mt = options.time_intervals.value_or(8);

    SharedTally tally;
    auto node_on = [&](const DuhamelGrid& grid) {
      return [&](double k) {
        PropagationTally local;
        ComplexMatrix v = source_node(prep.generator, k, backend, tol, u0, grid, local);
        tally.add(local);
        return v;
      };
    };
    auto evaluate = [&](int intervals, int time_intervals) {
      DuhamelGrid grid =
          build_duhamel_grid(cutoff, intervals, time_intervals, horizon, shifted_b);
      std::vector<ComplexVector> terms(grid.kernel.size());
      const auto node = node_on(grid);
      parallel_for(terms.size(), [&](std::size_t j) {
        terms[j] = grid.kernel.coefficients[j] * node(grid.kernel.nodes[j]).col(0);
      });
      return std::pair{pairwise_sum(std::span<const ComplexVector>(terms)),
                       std::move(grid)};
    };

    // The two trapezoid errors add, so each direction is refined on its own
    // against half the quadrature budget: first k on nested grids at the
    // starting M_t, then M_t at the settled M.
    ComplexVector value;
    double k_change = 0.0;
    if (options.intervals) {
      value = evaluate(m, mt).first;
    } else {
      const DuhamelGrid coarse = build_duhamel_grid(cutoff, 2, mt, horizon, shifted_b);
      AdaptiveQuadrature q =
          adaptive_kernel_quadrature(cutoff, m, 0.5 * r.budget.quadrature, node_on(coarse));
      m = q.grid.intervals;
      r.refinements = q.refinements;
      k_change = q.last_change;
      value = q.value.col(0);
    }
    double s_change = 0.0;
    if (!options.time_intervals) {
      s_change = std::numeric_limits<double>::infinity();
      while (!(s_change < 0.125 * r.budget.quadrature)) {
        mt *= 2;
        if (mt > (1 << 16))
          throw ConvergenceError("source time quadrature did not settle (last change " +
                                 std::to_string(s_change) + ")");
        ComplexVector next = evaluate(m, mt).first;
        s_change = (next - value).norm();
        value = std::move(next);
        ++r.refinements;
      }
    }
    const DuhamelGrid grid = build_duhamel_grid(cutoff, m, mt, horizon, shifted_b);
    r.quadrature_change = std::max(k_change, s_change);
    r.tally += tally.total();
    r.grid = grid.kernel;
    r.time_intervals = grid.time_intervals;
    r.homogeneous_prefactor = growth * grid.kernel.l1_norm * u0_norm;
    r.source_prefactor = growth * grid.weighted_l1_norm();
    r.prefactor = r.homogeneous_prefactor + r.source_prefactor;
    finish(r, value, horizon, eps, u0_norm + b_l1);
    return r;
  };

  const double first_surrogate = u0_norm > 0.0 ? u0_norm : b_l1;
  LCHSResult first = run(first_surrogate);
  const double achieved = first.solution.norm();
  if (!options.second_pass || achieved >= first_surrogate) return first;
  LCHSResult second = run(achieved);
  second.tally.propagator_calls += first.tally.propagator_calls;
  second.tally.exponentials += first.tally.exponentials;
  second.tally.phase_multiplications += first.tally.phase_multiplications;
  second.tally.exact_steps += first.tally.exact_steps;
  return second;
}

LCHSResult solve(const ProblemInstance& problem, double horizon, double eps,
                 const SolverOptions& options) {
  if (problem.source) return solve_inhomogeneous(problem, horizon, eps, options);
  return solve_homogeneous(problem, horizon, eps, options);
}

CombinedState combine_states(const ComplexVector& x0, double eta0,
                             const ComplexVector& x1, double eta1, double theta0,
                             double theta1) {
  if (x0.size() != x1.size()) throw DimensionError("combine_states: size mismatch");
  if (!(theta0 > 0.0) || !(theta1 > 0.0))
    throw PreconditionError("combine_states: weights must be positive");
  CombinedState out;
  out.state = theta0 * x0 + theta1 * x1;
  out.prefactor = eta0 * theta0 + eta1 * theta1;
  out.success_probability =
      out.prefactor > 0.0 ? out.state.squaredNorm() / (out.prefactor * out.prefactor) : 0.0;
  return out;
}

nlohmann::json to_json(const QueryTally& t) {
  return {{"propagator_calls", t.propagator_calls},
          {"state_preparations", t.state_preparations},
          {"exponentials", t.exponentials},
          {"phase_multiplications", t.phase_multiplications},
          {"exact_steps", t.exact_steps}};
}

nlohmann::json to_json(const LCHSResult& r) {
  auto parts = [](const ComplexVector& v) {
    std::vector<double> re(v.size()), im(v.size());
    for (Index i = 0; i < v.size(); ++i) {
      re[i] = v(i).real();
      im[i] = v(i).imag();
    }
    return nlohmann::json{{"re", re}, {"im", im}};
  };
  nlohmann::json j{{"solution", parts(r.solution)},
                   {"normalized", parts(r.normalized)},
                   {"norm", r.solution.norm()},
                   {"success_probability", r.success_probability},
                   {"prefactor", r.prefactor},
                   {"homogeneous_prefactor", r.homogeneous_prefactor},
                   {"source_prefactor", r.source_prefactor},
                   {"expected_repeats", r.expected_repeats},
                   {"shift", r.shift},
                   {"grid", to_json(r.grid)},
                   {"time_intervals", r.time_intervals},
                   {"refinements", r.refinements},
                   {"quadrature_change", r.quadrature_change},
                   {"budget",
                    {{"truncation", r.budget.truncation},
                     {"quadrature", r.budget.quadrature},
                     {"propagator", r.budget.propagator}}},
                   {"tally", to_json(r.tally)}};
  if (r.oracle_error) j["oracle_error"] = *r.oracle_error;
  return j;
}

}  // namespace lchs
