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

#include "lchs/kernel_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lchs/operators.hpp"
#include "lchs/parallel.hpp"

namespace lchs {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr long kMaxIntervals = 1L << 30;

int even_count(double m) {
  if (!(m < static_cast<double>(kMaxIntervals)))
    throw BudgetError("quadrature node count exceeds " + std::to_string(kMaxIntervals));
  long n = std::max(2L, static_cast<long>(std::ceil(m)));
  if (n % 2) ++n;
  return static_cast<int>(n);
}

void require_tolerance(double eps) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw PreconditionError("eps must lie in (0, 1), got " + std::to_string(eps));
}

}  // namespace

double DuhamelGrid::weighted_l1_norm() const {
  double s = 0.0;
  for (std::size_t jp = 0; jp < time_weights.size(); ++jp)
    s += time_weights[jp] * source_norms[jp];
  return s * kernel.l1_norm;
}

double kernel_tail(double cutoff) {
  if (cutoff <= 0.0) return 1.0;
  return 2.0 * std::atan(1.0 / cutoff) / kPi;
}

double truncation_cutoff(double eps, CutoffMode mode, double source_l1) {
  require_tolerance(eps);
  // kernel_tail(cot(pi eps / 2)) == eps exactly; nudge up against rounding.
  double k = (1.0 + 1e-12) / std::tan(0.5 * kPi * eps);
  if (mode == CutoffMode::Inhomogeneous) {
    if (source_l1 < 0.0) throw PreconditionError("source norm must be nonnegative");
    k = std::max(k, source_l1 / eps);
  }
  return k;
}

KernelGrid build_kernel_grid(double cutoff, int intervals) {
  if (intervals < 2) throw PreconditionError("kernel grid needs M >= 2");
  if (!(cutoff > 0.0) || !std::isfinite(cutoff))
    throw PreconditionError("kernel cutoff must be positive and finite");
  KernelGrid g;
  g.cutoff = cutoff;
  g.intervals = intervals;
  const std::size_t n = static_cast<std::size_t>(intervals) + 1;
  g.nodes.resize(n);
  g.weights.resize(n);
  g.coefficients.resize(n);
  const double m = intervals;
  for (std::size_t j = 0; j < n; ++j) {
    // Written so that k_j = -k_{M-j} bit for bit.
    const double k = cutoff * (2.0 * static_cast<double>(j) - m) / m;
    const bool end = j == 0 || j + 1 == n;
    const double w = (end ? 1.0 : 2.0) * cutoff / m;
    g.nodes[j] = k;
    g.weights[j] = w;
    g.coefficients[j] = w / (kPi * (1.0 + k * k));
  }
  g.l1_norm = pairwise_sum(std::span<const double>(g.coefficients));
  return g;
}

double curvature_envelope(double l_norm, double horizon) {
  const double x = l_norm * horizon;
  return (x * x + 4.0 * x + 6.0) / kPi;
}

double trapezoid_error_bound(double cutoff, int intervals, double l_norm,
                             double horizon) {
  const double width = 2.0 * cutoff;
  const double m = intervals;
  return width * width * width * curvature_envelope(l_norm, horizon) / (12.0 * m * m);
}

int node_count_homogeneous(double l_norm, double horizon, double eps,
                           std::optional<double> cutoff) {
  require_tolerance(eps);
  if (l_norm < 0.0 || horizon < 0.0)
    throw PreconditionError("norms and horizon must be nonnegative");
  const double k = cutoff.value_or(truncation_cutoff(eps));
  const double width = 2.0 * k;
  const double b = curvature_envelope(l_norm, horizon);
  return even_count(std::sqrt(width * width * width * b / (12.0 * eps)));
}

int node_count_time(const SourceNorms& n, double cutoff, double horizon,
                    double eps) {
  require_tolerance(eps);
  const double freq = n.h_norm + cutoff * n.l_norm;
  const double rate = n.h_derivative + cutoff * n.l_derivative;
  const double curvature = (n.b_second + 2.0 * n.b_derivative * freq +
                            n.b_norm * freq * freq + n.b_norm * rate) /
                           kPi;
  const double t3 = horizon * horizon * horizon;
  return even_count(std::sqrt(2.0 * cutoff * t3 * curvature / (12.0 * eps)));
}

DuhamelGrid build_duhamel_grid(double cutoff, int intervals, int time_intervals,
                               double horizon, const VectorFunction& source) {
  if (time_intervals < 2) throw PreconditionError("time grid needs M_t >= 2");
  if (!(horizon >= 0.0)) throw PreconditionError("horizon must be nonnegative");
  DuhamelGrid g;
  g.kernel = build_kernel_grid(cutoff, intervals);
  g.time_intervals = time_intervals;
  g.horizon = horizon;
  const std::size_t n = static_cast<std::size_t>(time_intervals) + 1;
  g.time_nodes = uniform_grid(horizon, static_cast<std::size_t>(time_intervals));
  g.time_weights.resize(n);
  g.source_samples.resize(n);
  g.source_norms.resize(n);
  for (std::size_t jp = 0; jp < n; ++jp) {
    const bool end = jp == 0 || jp + 1 == n;
    g.time_weights[jp] = (end ? 1.0 : 2.0) * horizon / (2.0 * time_intervals);
    try {
      g.source_samples[jp] = source(g.time_nodes[jp]);
    } catch (const std::exception& e) {
      throw ValidationError("source evaluation failed at s = " +
                            std::to_string(g.time_nodes[jp]) + ": " + e.what());
    }
    if (!g.source_samples[jp].allFinite())
      throw ValidationError("source is not finite at s = " +
                            std::to_string(g.time_nodes[jp]));
    g.source_norms[jp] = g.source_samples[jp].norm();
  }
  return g;
}

int initial_adaptive_intervals(double cutoff) {
  return even_count(2.0 * std::ceil(cutoff));
}

AdaptiveQuadrature adaptive_kernel_quadrature(
    double cutoff, int initial_intervals, double eps,
    const std::function<ComplexMatrix(double)>& node_value, int max_intervals) {
  if (!(eps > 0.0)) throw PreconditionError("quadrature tolerance must be positive");
  if (initial_intervals < 2 || initial_intervals % 2)
    throw PreconditionError("initial interval count must be even and >= 2");

  auto weighted_sum = [](const KernelGrid& grid,
                         const std::vector<ComplexMatrix>& values) {
    std::vector<ComplexMatrix> terms(values.size());
    for (std::size_t j = 0; j < values.size(); ++j)
      terms[j] = grid.coefficients[j] * values[j];
    return pairwise_sum(std::span<const ComplexMatrix>(terms));
  };

  AdaptiveQuadrature out;
  out.grid = build_kernel_grid(cutoff, initial_intervals);
  out.node_values.resize(out.grid.size());
  parallel_for(out.grid.size(), [&](std::size_t j) {
    out.node_values[j] = node_value(out.grid.nodes[j]);
  });
  out.value = weighted_sum(out.grid, out.node_values);
  out.last_change = std::numeric_limits<double>::infinity();

  for (;;) {
    const long next = 2L * out.grid.intervals;
    if (next > max_intervals)
      throw ConvergenceError("kernel quadrature did not settle below M = " +
                             std::to_string(max_intervals) + " (last change " +
                             std::to_string(out.last_change) + ")");
    KernelGrid fine = build_kernel_grid(cutoff, static_cast<int>(next));
    std::vector<ComplexMatrix> values(fine.size());
    for (std::size_t j = 0; j < out.node_values.size(); ++j)
      values[2 * j] = std::move(out.node_values[j]);
    // Only the odd (new) nodes are evaluated.
    parallel_for(out.grid.intervals, [&](std::size_t i) {
      const std::size_t j = 2 * i + 1;
      values[j] = node_value(fine.nodes[j]);
    });
    ComplexMatrix refined = weighted_sum(fine, values);
    out.last_change = (refined - out.value).norm();
    out.grid = std::move(fine);
    out.node_values = std::move(values);
    out.value = std::move(refined);
    ++out.refinements;
    if (out.last_change < 0.25 * eps) return out;
  }
}

nlohmann::json to_json(const KernelGrid& grid, bool include_nodes) {
  nlohmann::json j{{"K", grid.cutoff},
                   {"M", grid.intervals},
                   {"nodes_count", grid.size()},
                   {"l1_norm", grid.l1_norm}};
  if (include_nodes) {
    j["nodes"] = grid.nodes;
    j["weights"] = grid.weights;
    j["coefficients"] = grid.coefficients;
  }
  return j;
}

nlohmann::json to_json(const DuhamelGrid& grid, bool include_nodes) {
  nlohmann::json j{{"kernel", to_json(grid.kernel, include_nodes)},
                   {"M_t", grid.time_intervals},
                   {"T", grid.horizon},
                   {"weighted_l1_norm", grid.weighted_l1_norm()}};
  if (include_nodes) {
    j["time_nodes"] = grid.time_nodes;
    j["time_weights"] = grid.time_weights;
    j["source_norms"] = grid.source_norms;
  }
  return j;
}

}  // namespace lchs
