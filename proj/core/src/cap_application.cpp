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

#include "lchs/cap_application.hpp"

#include <algorithm>
#include <cmath>

#include "lchs/reference_oracle.hpp"

namespace lchs {

CapGrid make_cap_grid(Index points, double length) {
  if (points < 4) throw PreconditionError("cap grid needs at least 4 points");
  if (!(length > 0.0) || !std::isfinite(length))
    throw PreconditionError("cap domain length must be positive");
  CapGrid g;
  g.points = points;
  g.length = length;
  g.spacing = length / static_cast<double>(points);
  g.x.resize(points);
  for (Index i = 0; i < points; ++i) g.x[i] = (static_cast<double>(i) + 0.5) * g.spacing;
  return g;
}

ComplexMatrix kinetic_matrix(Index points, double spacing) {
  const double diag = 1.0 / (spacing * spacing);
  ComplexMatrix t = ComplexMatrix::Zero(points, points);
  for (Index i = 0; i < points; ++i) {
    t(i, i) = diag;
    if (i + 1 < points) {
      t(i, i + 1) = -0.5 * diag;
      t(i + 1, i) = -0.5 * diag;
    }
  }
  return t;
}

CapProblem discretize(Index points, double length, RealPotential real_potential,
                      const RealVector& absorber, double horizon,
                      bool real_potential_static) {
  CapGrid grid = make_cap_grid(points, length);
  if (absorber.size() != points)
    throw DimensionError("absorber has " + std::to_string(absorber.size()) +
                         " samples, grid has " + std::to_string(points));
  if ((absorber.array() < 0.0).any() || !absorber.allFinite())
    throw PreconditionError("absorber samples must be finite and nonnegative");
  ComplexMatrix kinetic = kinetic_matrix(points, grid.spacing);
  const bool is_static = real_potential_static || !real_potential;

  const ComplexMatrix dissipation = absorber.cast<Complex>().asDiagonal();
  MatrixFunction l_fn = [dissipation](double) { return dissipation; };
  MatrixFunction h_fn;
  if (!real_potential) {
    h_fn = [kinetic](double) { return kinetic; };
  } else {
    h_fn = [kinetic, v = real_potential, x = grid.x](double t) {
      ComplexMatrix h = kinetic;
      for (Index i = 0; i < x.size(); ++i) h(i, i) += v(x[i], t);
      return h;
    };
  }
  GeneratorTraits traits;
  traits.time_independent = is_static;
  traits.diagonal_dissipation = true;
  TimeDependentGenerator gen = TimeDependentGenerator::from_parts(
      points, horizon, std::move(l_fn), std::move(h_fn), traits);
  return CapProblem{std::move(grid), std::move(kinetic), std::move(real_potential), is_static,
                    absorber, std::move(gen)};
}

ComplexVector gaussian_packet(const CapGrid& grid, double x0, double p0, double sigma) {
  if (!(sigma > 0.0)) throw PreconditionError("packet width must be positive");
  ComplexVector u(grid.points);
  for (Index i = 0; i < grid.points; ++i) {
    const double d = grid.x[i] - x0;
    u[i] = std::exp(-d * d / (4.0 * sigma * sigma)) * std::exp(kI * (p0 * grid.x[i]));
  }
  const double n = u.norm();
  if (!(n > 0.0)) throw PreconditionError("packet vanishes on the grid");
  return u / n;
}

RealVector absorber_profile(const CapGrid& grid, double width, double strength, int power) {
  if (!(width > 0.0) || width >= 0.5 * grid.length || !(strength >= 0.0) || power < 1)
    throw PreconditionError("absorber needs 0 < width < length/2, strength >= 0, power >= 1");
  RealVector v = RealVector::Zero(grid.points);
  for (Index i = 0; i < grid.points; ++i) {
    const double d = std::min(grid.x[i], grid.length - grid.x[i]);
    if (d < width) v[i] = strength * std::pow((width - d) / width, power);
  }
  return v;
}

CapDemoResult run_cap_demo(const CapProblem& cap, const ComplexVector& u0, double horizon,
                           double eps, const PropagatorBackend& backend,
                           const std::vector<double>& snapshot_times) {
  if (u0.size() != cap.grid.points) throw DimensionError("initial state does not match grid");
  if (!(horizon > 0.0) || horizon > cap.generator.horizon() * (1.0 + 1e-12))
    throw PreconditionError("demo horizon must lie in (0, generator horizon]");
  std::vector<double> times = snapshot_times;
  std::sort(times.begin(), times.end());
  for (double t : times)
    if (t < 0.0 || t > horizon) throw PreconditionError("snapshot time outside [0, T]");
  std::vector<double> oracle_times = times;
  if (oracle_times.empty() || oracle_times.back() < horizon) oracle_times.push_back(horizon);

  ProblemInstance problem{cap.generator.with_horizon(horizon), u0, std::nullopt, {}};
  OracleConfig config;
  config.tolerance = std::min(1e-8, 1e-3 * eps);
  config.max_halvings = 16;
  const OracleTrajectory oracle = oracle_trajectory(problem, oracle_times, config);

  const double u0_norm = u0.norm();
  if (oracle.states.back().norm() < 1e-6 * u0_norm)
    throw DecayedSolutionError("packet fully absorbed before T; nothing left to estimate");

  CapDemoResult result;
  for (std::size_t i = 1; i < oracle.step_norms.size(); ++i)
    result.oracle_norm_increase =
        std::max(result.oracle_norm_increase, oracle.step_norms[i] - oracle.step_norms[i - 1]);

  SolverOptions options;
  options.backend = backend;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    CapSnapshot snap;
    snap.t = t;
    ComplexVector u = u0;
    if (t > 0.0) {
      LCHSResult r = solve_homogeneous(problem, t, eps, options);
      result.tally.propagator_calls += r.tally.propagator_calls;
      result.tally.state_preparations += r.tally.state_preparations;
      result.tally.exponentials += r.tally.exponentials;
      result.tally.phase_multiplications += r.tally.phase_multiplications;
      result.tally.exact_steps += r.tally.exact_steps;
      u = r.solution;
    }
    const ComplexVector& ref = oracle.states[i];
    snap.norm = u.norm();
    snap.oracle_norm = ref.norm();
    snap.error = (u - ref).norm() / std::max(snap.oracle_norm, 1e-300);
    snap.density.resize(static_cast<std::size_t>(u.size()));
    for (Index j = 0; j < u.size(); ++j) snap.density[static_cast<std::size_t>(j)] = std::norm(u[j]);
    result.snapshots.push_back(std::move(snap));
  }
  return result;
}

nlohmann::json to_json(const CapDemoResult& result) {
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& s : result.snapshots)
    snaps.push_back({{"t", s.t},
                     {"norm", s.norm},
                     {"oracle_norm", s.oracle_norm},
                     {"relative_error", s.error},
                     {"density", s.density}});
  return {{"snapshots", snaps},
          {"oracle_norm_increase", result.oracle_norm_increase},
          {"tally", to_json(result.tally)}};
}

}  // namespace lchs
