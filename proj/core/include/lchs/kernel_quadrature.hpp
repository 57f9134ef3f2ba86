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

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "lchs/types.hpp"

namespace lchs {

/// Trapezoid discretization of the Cauchy-Lorentz kernel 1/(pi (1 + k^2)) on
/// [-K, K] with M intervals.
struct KernelGrid {
  double cutoff = 0.0;  // K
  int intervals = 0;    // M
  std::vector<double> nodes;         // k_j = -K + 2 j K / M
  std::vector<double> weights;       // w_j, halved at both ends
  std::vector<double> coefficients;  // c_j = w_j / (pi (1 + k_j^2))
  double l1_norm = 0.0;

  std::size_t size() const { return nodes.size(); }
};

/// Two-dimensional grid for the source term: the kernel grid times a
/// trapezoid rule on [0, T]. Source samples are kept unnormalized.
struct DuhamelGrid {
  KernelGrid kernel;
  int time_intervals = 0;  // M_t
  double horizon = 0.0;
  std::vector<double> time_nodes;    // s_j' = j' T / M_t
  std::vector<double> time_weights;  // v_j'
  std::vector<ComplexVector> source_samples;  // b(s_j')
  std::vector<double> source_norms;           // ||b(s_j')||

  /// c~_{j,j'} = v_j' c_j
  double combined_coefficient(std::size_t j, std::size_t jp) const {
    return time_weights[jp] * kernel.coefficients[j];
  }
  /// sum_{j,j'} c~_{j,j'} ||b(s_j')||, the source block-encoding factor.
  double weighted_l1_norm() const;
};

/// (pi - 2 arctan K) / pi, the kernel mass outside [-K, K].
double kernel_tail(double cutoff);

enum class CutoffMode { Homogeneous, Inhomogeneous };

/// Smallest K with kernel_tail(K) <= eps. Inhomogeneous mode also enforces
/// K >= source_l1 / eps.
double truncation_cutoff(double eps, CutoffMode mode = CutoffMode::Homogeneous,
                         double source_l1 = 0.0);

KernelGrid build_kernel_grid(double cutoff, int intervals);

/// Envelope of |F''(k)| for the homogeneous integrand:
/// (||L||^2 T^2 + 4 ||L|| T + 6) / pi.
double curvature_envelope(double l_norm, double horizon);

/// Composite trapezoid bound (2K)^3 B / (12 M^2).
double trapezoid_error_bound(double cutoff, int intervals, double l_norm,
                             double horizon);

/// Even M from the explicit trapezoid bound. K defaults to
/// truncation_cutoff(eps).
int node_count_homogeneous(double l_norm, double horizon, double eps,
                           std::optional<double> cutoff = {});

/// Norm inputs for the time-node bound of the source quadrature.
struct SourceNorms {
  double h_norm = 0.0;        // max ||H||
  double h_derivative = 0.0;  // max ||H'||
  double l_norm = 0.0;
  double l_derivative = 0.0;
  double b_norm = 0.0;        // max ||b||
  double b_derivative = 0.0;  // max ||b'||
  double b_second = 0.0;      // max ||b''||
};

/// Even M_t from the explicit two-dimensional trapezoid bound
/// 2 K T (T^2 / M_t^2) max|F_ss| / 12 <= eps.
int node_count_time(const SourceNorms& norms, double cutoff, double horizon,
                    double eps);

DuhamelGrid build_duhamel_grid(double cutoff, int intervals,
                               int time_intervals, double horizon,
                               const VectorFunction& source);

/// Adaptive mode: doubles M (starting from an even initial_intervals) until
/// the quadrature sum moves by less than eps/4 in norm. Grids are nested, so
/// every distinct node is evaluated exactly once; new nodes of a level are
/// evaluated through parallel_for.
struct AdaptiveQuadrature {
  KernelGrid grid;
  ComplexMatrix value;
  std::vector<ComplexMatrix> node_values;  // aligned with grid.nodes
  int refinements = 0;
  double last_change = 0.0;
};

AdaptiveQuadrature adaptive_kernel_quadrature(
    double cutoff, int initial_intervals, double eps,
    const std::function<ComplexMatrix(double)>& node_value,
    int max_intervals = 1 << 22);

/// Default starting M for adaptive mode: unit node spacing, even.
int initial_adaptive_intervals(double cutoff);

nlohmann::json to_json(const KernelGrid& grid, bool include_nodes = false);
nlohmann::json to_json(const DuhamelGrid& grid, bool include_nodes = false);

}  // namespace lchs
