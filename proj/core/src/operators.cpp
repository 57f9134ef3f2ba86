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

#include "lchs/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace lchs {
namespace {

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": matrix is " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
  }
}

void require_hermitian(const ComplexMatrix& m, const char* what) {
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if (hermiticity_defect(m) > 1e-10 * scale) {
    throw PreconditionError(std::string(what) + " is not Hermitian");
  }
}

ComplexMatrix commutator(const ComplexMatrix& x, const ComplexMatrix& y) {
  return x * y - y * x;
}

// q-th central difference of f at t with step h (second-order accurate).
template <typename F>
ComplexMatrix central_difference(const F& f, double t, double h, int q) {
  ComplexMatrix acc = f(t);
  if (q == 0) return acc;
  acc.setZero();
  double binom = 1.0;
  for (int i = 0; i <= q; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    acc += (sign * binom) * f(t + (0.5 * q - i) * h);
    binom = binom * (q - i) / (i + 1);
  }
  return acc / std::pow(h, q);
}

}  // namespace

HermitianSplit hermitian_split(const ComplexMatrix& a) {
  require_square(a, "hermitian_split");
  const ComplexMatrix adj = a.adjoint();
  return {(a + adj) * 0.5, (a - adj) / (2.0 * kI)};
}

double spectral_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

double min_hermitian_eigenvalue(const ComplexMatrix& m) {
  require_square(m, "min_hermitian_eigenvalue");
  if (m.rows() == 1) return m(0, 0).real();
  const ComplexMatrix sym = (m + m.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

double hermiticity_defect(const ComplexMatrix& m) {
  require_square(m, "hermiticity_defect");
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_diagonal(const ComplexMatrix& m, double tol) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (i != j && std::abs(m(i, j)) > tol) return false;
  return true;
}

std::vector<double> uniform_grid(double horizon, std::size_t intervals) {
  if (intervals == 0) return {0.0};
  std::vector<double> grid(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    grid[i] = horizon * static_cast<double>(i) / static_cast<double>(intervals);
  grid.back() = horizon;
  return grid;
}

std::vector<double> default_time_grid(double horizon) {
  return uniform_grid(horizon, 128);
}

TimeDependentGenerator::TimeDependentGenerator(Index dim, double horizon,
                                               MatrixFunction a,
                                               GeneratorTraits traits)
    : dim_(dim), horizon_(horizon), a_(std::move(a)), traits_(traits) {
  if (dim <= 0) throw DimensionError("generator dimension must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw PreconditionError("horizon must be finite and nonnegative");
  auto fa = a_;
  l_ = [fa](double t) {
    const ComplexMatrix m = fa(t);
    return ComplexMatrix((m + m.adjoint()) * 0.5);
  };
  h_ = [fa](double t) {
    const ComplexMatrix m = fa(t);
    return ComplexMatrix((m - m.adjoint()) / (2.0 * kI));
  };
  const ComplexMatrix a0 = a_(0.0);
  if (a0.rows() != dim || a0.cols() != dim)
    throw DimensionError("generator evaluator returns the wrong shape");
}

TimeDependentGenerator::TimeDependentGenerator(Index dim, double horizon,
                                               MatrixFunction a,
                                               MatrixFunction l,
                                               MatrixFunction h,
                                               GeneratorTraits traits)
    : dim_(dim),
      horizon_(horizon),
      a_(std::move(a)),
      l_(std::move(l)),
      h_(std::move(h)),
      traits_(traits) {}

TimeDependentGenerator TimeDependentGenerator::from_parts(
    Index dim, double horizon, MatrixFunction dissipative,
    MatrixFunction hamiltonian, GeneratorTraits traits) {
  if (dim <= 0) throw DimensionError("generator dimension must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw PreconditionError("horizon must be finite and nonnegative");
  for (double t : {0.0, horizon}) {
    const ComplexMatrix l = dissipative(t);
    const ComplexMatrix h = hamiltonian(t);
    if (l.rows() != dim || l.cols() != dim || h.rows() != dim ||
        h.cols() != dim)
      throw DimensionError("generator part has the wrong shape");
    require_hermitian(l, "dissipative part");
    require_hermitian(h, "Hamiltonian part");
  }
  MatrixFunction a = [dissipative, hamiltonian](double t) {
    return ComplexMatrix(dissipative(t) + kI * hamiltonian(t));
  };
  return TimeDependentGenerator(dim, horizon, std::move(a),
                                std::move(dissipative), std::move(hamiltonian),
                                traits);
}

TimeDependentGenerator TimeDependentGenerator::constant(const ComplexMatrix& a,
                                                        double horizon) {
  require_square(a, "constant generator");
  const HermitianSplit split = hermitian_split(a);
  GeneratorTraits traits;
  traits.time_independent = true;
  traits.diagonal_dissipation = is_diagonal(split.dissipative);
  const ComplexMatrix l = split.dissipative;
  const ComplexMatrix h = split.hamiltonian;
  const ComplexMatrix full = a;
  return TimeDependentGenerator(
      a.rows(), horizon, [full](double) { return full; },
      [l](double) { return l; }, [h](double) { return h; }, traits);
}

RealVector TimeDependentGenerator::dissipation_diagonal() const {
  return l_(0.0).diagonal().real();
}

TimeDependentGenerator TimeDependentGenerator::shifted(double c) const {
  if (c == 0.0) return *this;
  const Index n = dim_;
  auto a = a_;
  auto l = l_;
  return TimeDependentGenerator(
      dim_, horizon_,
      [a, c, n](double t) {
        return ComplexMatrix(a(t) + c * ComplexMatrix::Identity(n, n));
      },
      [l, c, n](double t) {
        return ComplexMatrix(l(t) + c * ComplexMatrix::Identity(n, n));
      },
      h_, traits_);
}

TimeDependentGenerator TimeDependentGenerator::with_horizon(
    double horizon) const {
  TimeDependentGenerator g = *this;
  g.horizon_ = horizon;
  return g;
}

void ProblemInstance::validate() const {
  if (initial_state.size() != generator.dim())
    throw DimensionError("initial state has dimension " +
                         std::to_string(initial_state.size()) + ", expected " +
                         std::to_string(generator.dim()));
  if (!initial_state.allFinite())
    throw ValidationError("initial state has non-finite entries");
  if (source) {
    const ComplexVector b0 = (*source)(0.0);
    if (b0.size() != generator.dim())
      throw DimensionError("source has the wrong dimension");
  }
  if (!shift.automatic && !std::isfinite(shift.value))
    throw ValidationError("shift must be finite");
}

ShiftedGenerator spectral_shift(const TimeDependentGenerator& gen,
                                const std::vector<double>& grid) {
  if (grid.empty()) throw PreconditionError("spectral_shift: empty grid");
  double lowest = std::numeric_limits<double>::infinity();
  if (gen.time_independent()) {
    lowest = min_hermitian_eigenvalue(gen.dissipative(grid.front()));
  } else {
    for (double t : grid)
      lowest = std::min(lowest, min_hermitian_eigenvalue(gen.dissipative(t)));
  }
  const double c = -lowest;
  return {gen.shifted(c), c};
}

double derivative_step(double horizon, int q) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double t = horizon > 0.0 ? horizon : 1.0;
  return std::max(1e-4 * t, t * std::pow(eps, 1.0 / (q + 2)));
}

std::vector<double> derivative_norms(const TimeDependentGenerator& gen, int p,
                                     const std::vector<double>& grid) {
  if (p < 0) throw PreconditionError("derivative order must be nonnegative");
  if (grid.empty()) throw PreconditionError("derivative_norms: empty grid");
  std::vector<double> maxima(static_cast<std::size_t>(p) + 1, 0.0);
  const auto& l = gen.dissipative_function();
  const auto& h = gen.hamiltonian_function();
  for (int q = 0; q <= p; ++q) {
    // Constant generators: derivatives vanish and one sample suffices.
    if (q > 0 && gen.time_independent()) break;
    const double step = derivative_step(gen.horizon(), q);
    for (double t : grid) {
      const double value = spectral_norm(central_difference(h, t, step, q)) +
                           spectral_norm(central_difference(l, t, step, q));
      maxima[q] = std::max(maxima[q], value);
      if (gen.time_independent()) break;
    }
  }
  return maxima;
}

double gamma_parameter(const std::vector<double>& derivative_maxima) {
  double gamma = 0.0;
  for (std::size_t q = 0; q < derivative_maxima.size(); ++q)
    gamma = std::max(gamma, std::pow(derivative_maxima[q], 1.0 / (q + 1.0)));
  return gamma;
}

double nested_commutator_sum(const ComplexMatrix& h, const ComplexMatrix& l,
                             int p) {
  if (p < 0) throw PreconditionError("commutator order must be nonnegative");
  require_square(h, "nested_commutator_sum");
  if (h.rows() != l.rows() || h.cols() != l.cols())
    throw DimensionError("nested_commutator_sum: H and L differ in shape");
  // Depth-first over the choice tree; each level wraps one more commutator.
  const ComplexMatrix* ops[2] = {&h, &l};
  double total = 0.0;
  auto descend = [&](auto&& self, const ComplexMatrix& inner, int depth) -> void {
    if (depth == p) {
      total += spectral_norm(inner);
      return;
    }
    for (const ComplexMatrix* x : ops) self(self, commutator(*x, inner), depth + 1);
  };
  for (const ComplexMatrix* x0 : ops) descend(descend, *x0, 0);
  return std::pow(total, 1.0 / (p + 1));
}

}  // namespace lchs
