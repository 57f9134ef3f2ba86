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

#include "lchs/reference_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "lchs/kernel_quadrature.hpp"
#include "lchs/parallel.hpp"
#include "lchs/propagators.hpp"

namespace lchs {
namespace {

void check_config(const OracleConfig& config) {
  if (!(config.tolerance > 0.0)) throw PreconditionError("oracle tolerance must be positive");
  if (config.initial_steps < 1) throw PreconditionError("oracle needs at least one step");
  if (config.max_halvings < 0) throw PreconditionError("max_halvings must be nonnegative");
}

void check_interval(double t0, double t1, double horizon) {
  const double slack = 1e-12 * std::max(1.0, horizon);
  if (t0 < -slack || t1 < t0 - slack || t1 > horizon + slack)
    throw PreconditionError("interval [" + std::to_string(t0) + ", " +
                            std::to_string(t1) + "] outside [0, T]");
}

// One classical RK4 pass with n uniform steps, applied to `y` in place.
// `rate(t, y)` returns dy/dt.
template <typename State, typename Rate>
State rk4(const Rate& rate, double t0, double t1, State y, long n,
          std::vector<double>* norms = nullptr) {
  const double h = (t1 - t0) / static_cast<double>(n);
  for (long s = 0; s < n; ++s) {
    const double t = t0 + h * static_cast<double>(s);
    const State k1 = rate(t, y);
    const State k2 = rate(t + 0.5 * h, State(y + (0.5 * h) * k1));
    const State k3 = rate(t + 0.5 * h, State(y + (0.5 * h) * k2));
    const State k4 = rate(t + h, State(y + h * k3));
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (norms) norms->push_back(y.norm());
  }
  return y;
}

// Starting step count: the requested minimum, raised so that h ||G|| <= 1/4.
long starting_steps(const OracleConfig& config, double scale, double span) {
  const double needed = std::ceil(4.0 * scale * std::abs(span));
  return std::max<long>(config.initial_steps,
                        static_cast<long>(std::min(needed, 1e9)));
}

template <typename State, typename Rate>
State refine(const Rate& rate, double t0, double t1, const State& y0,
             const OracleConfig& config, double scale,
             std::vector<double>* norms = nullptr) {
  long n = starting_steps(config, scale, t1 - t0);
  State coarse = rk4(rate, t0, t1, y0, n);
  for (int level = 0; level <= config.max_halvings; ++level) {
    n *= 2;
    std::vector<double> fine_norms;
    State fine = rk4(rate, t0, t1, y0, n, norms ? &fine_norms : nullptr);
    const double ref = std::max(1.0, fine.norm());
    if ((fine - coarse).norm() < 0.5 * config.tolerance * ref) {
      if (norms) norms->insert(norms->end(), fine_norms.begin(), fine_norms.end());
      return fine;
    }
    coarse = std::move(fine);
  }
  throw ConvergenceError("RK4 oracle did not converge after " +
                         std::to_string(config.max_halvings) + " halvings");
}

}  // namespace

ComplexMatrix ordered_exponential(const MatrixFunction& rate, Index dim,
                                  double t0, double t1,
                                  const OracleConfig& config) {
  check_config(config);
  const ComplexMatrix identity = ComplexMatrix::Identity(dim, dim);
  if (t1 == t0) return identity;
  const double scale = rate(0.5 * (t0 + t1)).norm();
  auto f = [&rate](double t, const ComplexMatrix& w) {
    return ComplexMatrix(rate(t) * w);
  };
  return refine(f, t0, t1, identity, config, scale);
}

ComplexMatrix time_ordered_exp(const TimeDependentGenerator& gen, double t0,
                               double t1, double tol) {
  OracleConfig config;
  config.tolerance = tol;
  return time_ordered_exp(gen, t0, t1, config);
}

ComplexMatrix time_ordered_exp(const TimeDependentGenerator& gen, double t0,
                               double t1, const OracleConfig& config) {
  check_interval(t0, t1, gen.horizon());
  const auto& a = gen.a_function();
  return ordered_exponential([&a](double t) { return ComplexMatrix(-a(t)); },
                             gen.dim(), t0, t1, config);
}

ComplexMatrix hamiltonian_flow_oracle(const TimeDependentGenerator& gen,
                                      double k, double t0, double t1,
                                      double tol) {
  check_interval(t0, t1, gen.horizon());
  OracleConfig config;
  config.tolerance = tol;
  const auto& l = gen.dissipative_function();
  const auto& h = gen.hamiltonian_function();
  return ordered_exponential(
      [&l, &h, k](double t) { return ComplexMatrix(-kI * (h(t) + k * l(t))); },
      gen.dim(), t0, t1, config);
}

ComplexMatrix hermitian_propagator_exact(const ComplexMatrix& h, double s) {
  if (h.rows() != h.cols()) throw DimensionError("hermitian_propagator_exact: not square");
  const double scale = 1.0 + (h.size() ? h.cwiseAbs().maxCoeff() : 0.0);
  if (hermiticity_defect(h) > 1e-10 * scale)
    throw PreconditionError("hermitian_propagator_exact: matrix is not Hermitian");
  const ComplexMatrix sym = (h + h.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(sym);
  const auto& lambda = eig.eigenvalues();
  ComplexVector phase(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) phase(i) = std::exp(-kI * (lambda(i) * s));
  const ComplexMatrix& v = eig.eigenvectors();
  return v * phase.asDiagonal() * v.adjoint();
}

OracleTrajectory oracle_trajectory(const ProblemInstance& problem,
                                   const std::vector<double>& times,
                                   const OracleConfig& config) {
  check_config(config);
  problem.validate();
  const auto& gen = problem.generator;
  const auto& a = gen.a_function();
  const auto& source = problem.source;
  auto rate = [&a, &source](double t, const ComplexVector& u) {
    ComplexVector du = -(a(t) * u);
    if (source) du += (*source)(t);
    return du;
  };
  OracleTrajectory out;
  ComplexVector u = problem.initial_state;
  double t = 0.0;
  out.step_norms.push_back(u.norm());
  for (double target : times) {
    if (target < t - 1e-14)
      throw PreconditionError("oracle_trajectory: times must be ascending");
    if (target > t) {
      const double scale = a(0.5 * (t + target)).norm();
      u = refine(rate, t, target, u, config, scale, &out.step_norms);
      t = target;
    }
    out.times.push_back(target);
    out.states.push_back(u);
  }
  return out;
}

ComplexVector oracle_solve(const ProblemInstance& problem, double t,
                           const OracleConfig& config) {
  return oracle_trajectory(problem, {t}, config).states.front();
}

IdentityCheck verify_lchs_identity(const TimeDependentGenerator& gen,
                                   double horizon, double cutoff,
                                   int intervals, double tol_ode,
                                   IdentityRhs rhs) {
  check_interval(0.0, horizon, gen.horizon());
  for (double t : default_time_grid(horizon)) {
    if (min_hermitian_eigenvalue(gen.dissipative(t)) < -1e-10)
      throw PreconditionError("verify_lchs_identity: L(t) is not positive semidefinite");
    if (gen.time_independent()) break;
  }
  const KernelGrid grid = build_kernel_grid(cutoff, intervals);
  const ComplexMatrix lhs = time_ordered_exp(gen, 0.0, horizon, tol_ode);

  std::vector<ComplexMatrix> terms(grid.size());
  const ComplexMatrix identity = ComplexMatrix::Identity(gen.dim(), gen.dim());
  parallel_for(grid.size(), [&](std::size_t j) {
    ComplexMatrix u;
    if (rhs == IdentityRhs::Oracle) {
      u = hamiltonian_flow_oracle(gen, grid.nodes[j], 0.0, horizon, tol_ode);
    } else {
      NodePropagator prop(gen, grid.nodes[j], ExactStepping{tol_ode});
      u = prop.apply(0.0, horizon, identity);
    }
    terms[j] = grid.coefficients[j] * u;
  });
  const ComplexMatrix sum = pairwise_sum(std::span<const ComplexMatrix>(terms));

  IdentityCheck out;
  out.lhs_rhs_error = spectral_norm(lhs - sum);
  out.truncation_bound = kernel_tail(cutoff);
  out.weight_deficit = std::abs(grid.l1_norm - 1.0);
  out.cutoff = cutoff;
  out.intervals = intervals;
  return out;
}

long default_principal_value_nodes(const ComplexMatrix& h,
                                   const ComplexMatrix& l, double radius) {
  const double n = 200.0 * radius * (spectral_norm(l) + spectral_norm(h) + 1.0);
  return static_cast<long>(std::min(std::ceil(n), 2e7));
}

double verify_principal_value(const ComplexMatrix& h, const ComplexMatrix& l,
                              double radius, std::optional<long> nodes) {
  if (h.rows() != h.cols() || l.rows() != h.rows() || l.cols() != h.cols())
    throw DimensionError("verify_principal_value: shape mismatch");
  if (!(radius > 0.0)) throw PreconditionError("radius must be positive");
  if (min_hermitian_eigenvalue(l) <= 0.0)
    throw PreconditionError("verify_principal_value: L must be positive definite");
  const long m = nodes.value_or(default_principal_value_nodes(h, l, radius));
  if (m < 2) throw PreconditionError("verify_principal_value: need at least 2 intervals");
  const double step = 2.0 * radius / static_cast<double>(m);

  // The kernel exp(-i (H + k L)) is diagonalized once per node; the 2x2 case
  // (the common one) uses the closed form a I + b.sigma.
  const Index n = h.rows();
  auto integrand = [&](double k) -> ComplexMatrix {
    const ComplexMatrix g = h + k * l;
    if (n == 2) {
      const double a = 0.5 * (g(0, 0).real() + g(1, 1).real());
      const double bz = 0.5 * (g(0, 0).real() - g(1, 1).real());
      const Complex off = g(0, 1);  // bx - i by
      const double r = std::sqrt(bz * bz + std::norm(off));
      const double c = std::cos(r);
      const double sinc = r > 0.0 ? std::sin(r) / r : 1.0;
      const Complex phase = std::exp(-kI * a);
      ComplexMatrix e(2, 2);
      e(0, 0) = phase * Complex(c, -sinc * bz);
      e(1, 1) = phase * Complex(c, sinc * bz);
      e(0, 1) = phase * (-kI * sinc) * off;
      e(1, 0) = phase * (-kI * sinc) * std::conj(off);
      return e / Complex(1.0, k);
    }
    return hermitian_propagator_exact(g, 1.0) / Complex(1.0, k);
  };

  constexpr long kBlock = 4096;
  const long blocks = (m + 1 + kBlock - 1) / kBlock;
  std::vector<ComplexMatrix> partial(static_cast<std::size_t>(blocks));
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    std::vector<ComplexMatrix> local;
    const long lo = static_cast<long>(b) * kBlock;
    const long hi = std::min(m + 1, lo + kBlock);
    local.reserve(static_cast<std::size_t>(hi - lo));
    for (long i = lo; i < hi; ++i) {
      const double k = -radius + step * static_cast<double>(i);
      const double w = (i == 0 || i == m) ? 0.5 * step : step;
      local.push_back(w * integrand(k));
    }
    partial[b] = pairwise_sum(std::span<const ComplexMatrix>(local));
  });
  const ComplexMatrix total = pairwise_sum(std::span<const ComplexMatrix>(partial));
  return spectral_norm(total);
}

}  // namespace lchs
