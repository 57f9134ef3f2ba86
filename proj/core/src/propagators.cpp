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

#include "lchs/propagators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

namespace lchs {
namespace {

constexpr int kMaxHalvings = 16;

// exp(-i M) for Hermitian M, applied to the columns of `state`.
ComplexMatrix apply_hermitian_exp(const ComplexMatrix& m, const ComplexMatrix& state) {
  if (m.rows() == 1) return std::exp(-kI * m(0, 0).real()) * state;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m);
  const ComplexMatrix& v = eig.eigenvectors();
  ComplexMatrix coeffs = v.adjoint() * state;
  for (Index i = 0; i < coeffs.rows(); ++i)
    coeffs.row(i) *= std::exp(-kI * eig.eigenvalues()(i));
  return v * coeffs;
}

// Eigendecomposition of a constant Hermitian matrix, reused for any time.
struct Spectrum {
  RealVector values;
  ComplexMatrix vectors;
  bool diagonal = false;

  static Spectrum of(const ComplexMatrix& m) {
    Spectrum s;
    if (is_diagonal(m)) {
      s.diagonal = true;
      s.values = m.diagonal().real();
      return s;
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig((m + m.adjoint()) * 0.5);
    s.values = eig.eigenvalues();
    s.vectors = eig.eigenvectors();
    return s;
  }

  // exp(-i scale M) as a dense matrix.
  ComplexMatrix exp(double scale) const {
    ComplexVector phase(values.size());
    for (Index i = 0; i < values.size(); ++i) phase(i) = std::exp(-kI * (values(i) * scale));
    if (diagonal) return phase.asDiagonal();
    return vectors * phase.asDiagonal() * vectors.adjoint();
  }

  ComplexMatrix apply(double scale, const ComplexMatrix& state) const {
    ComplexMatrix out = diagonal ? state : ComplexMatrix(vectors.adjoint() * state);
    for (Index i = 0; i < out.rows(); ++i)
      out.row(i) *= std::exp(-kI * (values(i) * scale));
    return diagonal ? out : ComplexMatrix(vectors * out);
  }
};

// One pass of n fourth-order Magnus steps (two Gauss points) for
// i dy/dt = G(t) y.
template <typename Rate>
ComplexMatrix magnus_pass(const Rate& g, double t0, double t1, long n,
                          ComplexMatrix state) {
  static const double kRoot3 = std::sqrt(3.0);
  const double c1 = 0.5 - kRoot3 / 6.0;
  const double c2 = 0.5 + kRoot3 / 6.0;
  const double dt = (t1 - t0) / static_cast<double>(n);
  for (long s = 0; s < n; ++s) {
    const double t = t0 + dt * static_cast<double>(s);
    const ComplexMatrix g1 = g(t + c1 * dt);
    const ComplexMatrix g2 = g(t + c2 * dt);
    ComplexMatrix eff = (0.5 * dt) * (g1 + g2);
    eff -= kI * (kRoot3 / 12.0 * dt * dt) * (g2 * g1 - g1 * g2);
    state = apply_hermitian_exp(eff, state);
  }
  return state;
}

// Magnus stepping with step doubling. After each comparison the step count
// jumps by the power of two the fourth-order error model asks for.
template <typename Rate>
ComplexMatrix adaptive_magnus(const Rate& g, double t0, double t1, double tol,
                              const ComplexMatrix& state,
                              PropagationTally* tally) {
  const double scale = std::max(1.0, state.norm());
  long n = 2;
  std::uint64_t steps = 0;
  ComplexMatrix coarse = magnus_pass(g, t0, t1, n, state);
  steps += n;
  int halvings = 0;
  for (;;) {
    ComplexMatrix fine = magnus_pass(g, t0, t1, 2 * n, state);
    steps += 2 * n;
    ++halvings;
    const double diff = (fine - coarse).norm();
    if (diff < 0.5 * tol * scale) {
      if (tally) tally->exact_steps += steps;
      return fine;
    }
    if (halvings >= kMaxHalvings)
      throw ConvergenceError("exact stepping did not converge after " +
                             std::to_string(kMaxHalvings) + " halvings");
    const double ratio = std::pow(2.0 * diff / (tol * scale), 0.25) * 1.25;
    const int jump = std::clamp(static_cast<int>(std::ceil(std::log2(ratio))), 1,
                                kMaxHalvings - halvings);
    if (jump == 1) {
      n *= 2;
      coarse = std::move(fine);
    } else {
      n <<= jump;
      halvings += jump - 1;
      coarse = magnus_pass(g, t0, t1, n, state);
      steps += n;
    }
  }
}

void require_state(const ComplexMatrix& state, Index dim) {
  if (state.rows() != dim)
    throw DimensionError("state has " + std::to_string(state.rows()) +
                         " rows, generator has dimension " + std::to_string(dim));
  if (!state.allFinite()) throw ValidationError("state has non-finite entries");
}

double effective_tolerance(double tol) {
  return tol > 0.0 ? tol : kDefaultPropagatorTolerance;
}

void add_phase(ComplexMatrix& state, const RealVector& diag, double scale) {
  for (Index i = 0; i < state.rows(); ++i) state.row(i) *= std::exp(-kI * (diag(i) * scale));
}

}  // namespace

double suzuki_weight() { return 1.0 / (4.0 - std::cbrt(4.0)); }

ProductFormula suzuki_recursion(int order) {
  // Strang blocks of relative length s, stacked along one clock.
  auto strang = [](double s, double start, std::vector<FormulaStage>& out) {
    out.push_back({0.0, 0.5 * s, start, start + 0.25 * s});
    out.push_back({s, 0.5 * s, start + 0.5 * s, start + 0.75 * s});
  };
  ProductFormula f;
  f.order = order;
  switch (order) {
    case 1:
      f.stages.push_back({1.0, 1.0, 0.5, 0.5});
      break;
    case 2:
      strang(1.0, 0.0, f.stages);
      break;
    case 4: {
      const double u = suzuki_weight();
      double clock = 0.0;
      for (double s : {u, u, 1.0 - 4.0 * u, u, u}) {
        strang(s, clock, f.stages);
        clock += s;
      }
      break;
    }
    default:
      throw PreconditionError("product formula order must be 1, 2 or 4, got " +
                              std::to_string(order));
  }
  return f;
}

PropagatorBackend parse_backend(std::string_view text) {
  const std::string s(text);
  const auto colon = s.find(':');
  const std::string name = s.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : s.substr(colon + 1);
  auto number = [&](const std::string& item) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      return v;
    } catch (const std::logic_error&) {
      throw ValidationError("bad backend argument '" + item + "' in '" + s + "'");
    }
  };
  if (name == "exact" || name == "interaction") {
    const double tol = args.empty() ? 0.0 : number(args);
    if (!(tol >= 0.0)) throw ValidationError("backend tolerance must be nonnegative");
    if (name == "exact") return ExactStepping{tol};
    return InteractionPicture{tol};
  }
  if (name == "trotter") {
    const auto comma = args.find(',');
    if (comma == std::string::npos)
      throw ValidationError("trotter backend takes 'trotter:p,r', got '" + s + "'");
    const double p = number(args.substr(0, comma));
    const double r = number(args.substr(comma + 1));
    if (p != std::floor(p) || r != std::floor(r) || r < 1)
      throw ValidationError("trotter order and steps must be integers, r >= 1");
    try {
      return Trotter{suzuki_recursion(static_cast<int>(p)), static_cast<int>(r)};
    } catch (const PreconditionError& e) {
      throw ValidationError(e.what());
    }
  }
  throw ValidationError("unknown backend '" + s + "' (exact, trotter:p,r, interaction)");
}

std::string describe(const PropagatorBackend& backend) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, ExactStepping>) {
          os << "exact";
          if (b.tolerance > 0.0) os << ":" << b.tolerance;
        } else if constexpr (std::is_same_v<B, Trotter>) {
          os << "trotter:" << b.formula.order << "," << b.steps;
        } else {
          os << "interaction";
          if (b.tolerance > 0.0) os << ":" << b.tolerance;
        }
      },
      backend);
  return os.str();
}

PropagationTally& PropagationTally::operator+=(const PropagationTally& o) {
  propagator_calls += o.propagator_calls;
  exponentials += o.exponentials;
  phase_multiplications += o.phase_multiplications;
  exact_steps += o.exact_steps;
  return *this;
}

struct NodePropagator::Cache {
  // Constant generators: spectrum of H + k L, and of the parts for Trotter.
  std::optional<Spectrum> full;
  std::optional<Spectrum> dissipative;
  std::optional<Spectrum> hamiltonian;
  // Interaction picture: diagonal of L and, if constant, H.
  RealVector diagonal;
  std::optional<ComplexMatrix> constant_h;
};

NodePropagator::NodePropagator(const TimeDependentGenerator& gen, double k,
                               PropagatorBackend backend)
    : gen_(&gen), k_(k), backend_(std::move(backend)), cache_(std::make_unique<Cache>()) {
  if (!std::isfinite(k)) throw PreconditionError("kernel node must be finite");
  const bool constant = gen.time_independent();
  std::visit(
      [&](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, ExactStepping>) {
          if (b.tolerance < 0.0) throw PreconditionError("tolerance must be nonnegative");
          if (constant)
            cache_->full = Spectrum::of(gen.hamiltonian(0.0) + k * gen.dissipative(0.0));
        } else if constexpr (std::is_same_v<B, Trotter>) {
          if (b.steps < 1) throw PreconditionError("Trotter needs r >= 1");
          if (b.formula.stages.empty()) throw PreconditionError("empty product formula");
          if (constant) {
            cache_->dissipative = Spectrum::of(gen.dissipative(0.0));
            cache_->hamiltonian = Spectrum::of(gen.hamiltonian(0.0));
          }
        } else {
          if (b.tolerance < 0.0) throw PreconditionError("tolerance must be nonnegative");
          if (!gen.has_diagonal_dissipation())
            throw PreconditionError(
                "interaction picture needs a diagonal, time-independent L");
          cache_->diagonal = gen.dissipation_diagonal();
          if (cache_->diagonal.size() && cache_->diagonal.minCoeff() < -1e-10)
            throw PreconditionError("interaction picture needs L >= 0");
          if (constant) cache_->constant_h = gen.hamiltonian(0.0);
        }
      },
      backend_);
}

NodePropagator::~NodePropagator() = default;
NodePropagator::NodePropagator(NodePropagator&&) noexcept = default;
NodePropagator& NodePropagator::operator=(NodePropagator&&) noexcept = default;

ComplexMatrix NodePropagator::apply(double t0, double t1, const ComplexMatrix& state,
                                    PropagationTally* tally) const {
  require_state(state, gen_->dim());
  if (tally) ++tally->propagator_calls;
  const double k = k_;
  const auto& gen = *gen_;
  return std::visit(
      [&](const auto& b) -> ComplexMatrix {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, ExactStepping>) {
          if (cache_->full) {
            if (tally) ++tally->exact_steps;
            return cache_->full->apply(t1 - t0, state);
          }
          const auto& l = gen.dissipative_function();
          const auto& h = gen.hamiltonian_function();
          auto g = [&](double t) { return ComplexMatrix(h(t) + k * l(t)); };
          return adaptive_magnus(g, t0, t1, effective_tolerance(b.tolerance), state,
                                 tally);
        } else if constexpr (std::is_same_v<B, Trotter>) {
          const double dt = (t1 - t0) / b.steps;
          const auto& stages = b.formula.stages;
          ComplexMatrix out = state;
          if (tally) tally->exponentials += 2ULL * stages.size() * static_cast<std::uint64_t>(b.steps);
          if (cache_->dissipative) {
            std::vector<ComplexMatrix> factors;
            factors.reserve(stages.size());
            for (const auto& st : stages)
              factors.push_back(cache_->hamiltonian->exp(st.h_coeff * dt) *
                                cache_->dissipative->exp(k * st.l_coeff * dt));
            for (int step = 0; step < b.steps; ++step)
              for (const auto& f : factors) out = f * out;
            return out;
          }
          const bool diag_l = gen.has_diagonal_dissipation();
          const RealVector d = diag_l ? gen.dissipation_diagonal() : RealVector();
          for (int step = 0; step < b.steps; ++step) {
            const double base = t0 + dt * step;
            for (const auto& st : stages) {
              if (diag_l) {
                add_phase(out, d, k * st.l_coeff * dt);
              } else {
                out = apply_hermitian_exp(
                    gen.dissipative(base + st.l_offset * dt) * (k * st.l_coeff * dt), out);
              }
              out = apply_hermitian_exp(
                  gen.hamiltonian(base + st.h_offset * dt) * (st.h_coeff * dt), out);
            }
          }
          return out;
        } else {
          return interaction_picture_propagate(
              gen.hamiltonian_function(), cache_->constant_h.has_value(),
              cache_->diagonal, k, t0, t1, effective_tolerance(b.tolerance), state,
              tally);
        }
      },
      backend_);
}

ComplexVector propagate(const TimeDependentGenerator& gen, double k, double t0,
                        double t1, const PropagatorBackend& backend,
                        const ComplexVector& state, PropagationTally* tally) {
  const ComplexMatrix out = NodePropagator(gen, k, backend).apply(t0, t1, state, tally);
  return out.col(0);
}

ComplexMatrix propagate(const TimeDependentGenerator& gen, double k, double t0,
                        double t1, const PropagatorBackend& backend,
                        const ComplexMatrix& state, PropagationTally* tally) {
  return NodePropagator(gen, k, backend).apply(t0, t1, state, tally);
}

ComplexMatrix interaction_picture_propagate(const MatrixFunction& hamiltonian,
                                            bool hamiltonian_constant,
                                            const RealVector& dissipation,
                                            double k, double t0, double t1,
                                            double tol, const ComplexMatrix& state,
                                            PropagationTally* tally) {
  require_state(state, dissipation.size());
  if (!(tol > 0.0)) throw PreconditionError("tolerance must be positive");
  const std::uint64_t phases = static_cast<std::uint64_t>(state.size());
  // exp(i L k t0): enter the interaction frame.
  ComplexMatrix psi = state;
  add_phase(psi, dissipation, -k * t0);
  const ComplexMatrix h_fixed = hamiltonian_constant ? hamiltonian(t0) : ComplexMatrix();
  auto h_int = [&](double s) {
    ComplexMatrix m = hamiltonian_constant ? h_fixed : hamiltonian(s);
    for (Index b = 0; b < m.cols(); ++b)
      for (Index a = 0; a < m.rows(); ++a)
        m(a, b) *= std::exp(kI * (k * (dissipation(a) - dissipation(b)) * s));
    return m;
  };
  psi = adaptive_magnus(h_int, t0, t1, tol, psi, tally);
  // exp(-i L k t1): leave it.
  add_phase(psi, dissipation, k * t1);
  if (tally) tally->phase_multiplications += 2 * phases;
  return psi;
}

}  // namespace lchs
