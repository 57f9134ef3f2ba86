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

#include "lchs/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/QR>

namespace lchs {
namespace {

using nlohmann::json;

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos)
        throw ValidationError("bad number '" + item + "'");
    } catch (const std::logic_error&) {
      throw ValidationError("bad number '" + item + "' in time profile");
    }
  }
  return out;
}

bool is_pair(const json& e) {
  return e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number();
}

bool is_scalar(const json& e) { return e.is_number() || is_pair(e); }

Complex scalar_from_json(const json& e, const std::string& where) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (is_pair(e)) return {e[0].get<double>(), e[1].get<double>()};
  throw ValidationError(where + ": expected a number or [re, im]");
}

json scalar_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

void fail(const std::string& path, const std::string& message) {
  throw ValidationError(path + ": " + message);
}

void check_vector(const json& v, std::size_t dim, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  if (v.size() != dim)
    fail(path, "expected " + std::to_string(dim) + " entries, got " +
                   std::to_string(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!is_scalar(v[i]))
      fail(path + "[" + std::to_string(i) + "]", "expected a number or [re, im]");
}

void check_profile(const json& term, const std::string& path) {
  if (!term.contains("time_profile")) return;
  if (!term["time_profile"].is_string()) fail(path + ".time_profile", "expected a string");
  try {
    TimeProfile::parse(term["time_profile"].get<std::string>());
  } catch (const ValidationError& e) {
    fail(path + ".time_profile", e.what());
  }
}

std::mt19937_64 seeded(std::uint64_t seed) {
  std::seed_seq seq{seed, std::uint64_t{0x4c434853}};
  return std::mt19937_64(seq);
}

ComplexMatrix gaussian_matrix(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  ComplexMatrix m(dim, dim);
  for (Index j = 0; j < dim; ++j)
    for (Index i = 0; i < dim; ++i) m(i, j) = Complex(normal(rng), normal(rng));
  return m;
}

ComplexMatrix hermitian_with_norm(Index dim, double norm, std::mt19937_64& rng) {
  const ComplexMatrix g = gaussian_matrix(dim, rng);
  ComplexMatrix h = (g + g.adjoint()) * 0.5;
  const double current = spectral_norm(h);
  if (current > 0.0) h *= norm / current;
  return h;
}

ComplexVector unit_vector(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  ComplexVector v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v / v.norm();
}

}  // namespace

TimeProfile TimeProfile::parse(const std::string& text) {
  if (text == "const" || text.empty()) return constant();
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ValidationError("unknown time profile '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::vector<double> params = parse_numbers(text.substr(colon + 1));
  if (kind == "poly") {
    if (params.empty()) throw ValidationError("poly profile needs coefficients");
    return polynomial(params);
  }
  if (kind == "sin") {
    if (params.size() != 2)
      throw ValidationError("sin profile takes freq,phase");
    return sine(params[0], params[1]);
  }
  throw ValidationError("unknown time profile '" + text + "'");
}

TimeProfile TimeProfile::polynomial(std::vector<double> coeffs) {
  return TimeProfile{Kind::Polynomial, std::move(coeffs)};
}

TimeProfile TimeProfile::sine(double freq, double phase) {
  return TimeProfile{Kind::Sine, {freq, phase}};
}

double TimeProfile::operator()(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return 1.0;
    case Kind::Polynomial: {
      double acc = 0.0;
      for (auto it = params_.rbegin(); it != params_.rend(); ++it) acc = acc * t + *it;
      return acc;
    }
    case Kind::Sine:
      return std::sin(params_[0] * t + params_[1]);
  }
  return 0.0;
}

std::string TimeProfile::to_string() const {
  if (kind_ == Kind::Constant) return "const";
  std::ostringstream os;
  os.precision(17);
  os << (kind_ == Kind::Polynomial ? "poly:" : "sin:");
  for (std::size_t i = 0; i < params_.size(); ++i) os << (i ? "," : "") << params_[i];
  return os.str();
}

ProblemInstance ProblemSpec::instance() const {
  if (terms.empty()) throw ValidationError("problem has no generator terms");
  struct SplitTerm {
    ComplexMatrix l, h;
    TimeProfile profile;
  };
  std::vector<SplitTerm> split;
  bool constant_in_time = true;
  bool dissipation_constant = true;
  for (const auto& term : terms) {
    if (term.matrix.rows() != dim || term.matrix.cols() != dim)
      throw DimensionError("generator term has the wrong shape");
    const HermitianSplit s = hermitian_split(term.matrix);
    const bool is_const = term.profile.kind() == TimeProfile::Kind::Constant;
    constant_in_time = constant_in_time && is_const;
    if (!is_const && s.dissipative.cwiseAbs().maxCoeff() > 0.0)
      dissipation_constant = false;
    split.push_back({s.dissipative, s.hamiltonian, term.profile});
  }
  const Index n = dim;
  auto l = [split, n](double t) {
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (const auto& s : split) m += s.profile(t) * s.l;
    return m;
  };
  auto h = [split, n](double t) {
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (const auto& s : split) m += s.profile(t) * s.h;
    return m;
  };
  GeneratorTraits traits;
  traits.time_independent = constant_in_time;
  traits.diagonal_dissipation = dissipation_constant && is_diagonal(l(0.0));
  auto gen = constant_in_time
                 ? TimeDependentGenerator::constant(l(0.0) + kI * h(0.0), horizon)
                 : TimeDependentGenerator::from_parts(dim, horizon, l, h, traits);
  std::optional<VectorFunction> b;
  if (!source.empty()) {
    for (const auto& term : source)
      if (term.vector.size() != dim) throw DimensionError("source term has the wrong size");
    auto terms_copy = source;
    b = [terms_copy, n](double t) {
      ComplexVector v = ComplexVector::Zero(n);
      for (const auto& s : terms_copy) v += s.profile(t) * s.vector;
      return v;
    };
  }
  ProblemInstance inst{gen, initial_state, b, shift};
  inst.validate();
  return inst;
}

void validate_problem_json(const json& j) {
  if (!j.is_object()) fail("$", "expected an object");
  if (!j.contains("dim")) fail("$.dim", "missing");
  if (!j["dim"].is_number_integer() || j["dim"].get<long>() <= 0)
    fail("$.dim", "expected a positive integer");
  const auto dim = j["dim"].get<std::size_t>();
  if (!j.contains("T")) fail("$.T", "missing");
  if (!j["T"].is_number() || !(j["T"].get<double>() >= 0.0))
    fail("$.T", "expected a nonnegative number");
  if (!j.contains("terms")) fail("$.terms", "missing");
  if (!j["terms"].is_array() || j["terms"].empty())
    fail("$.terms", "expected a nonempty array");
  for (std::size_t i = 0; i < j["terms"].size(); ++i) {
    const std::string path = "$.terms[" + std::to_string(i) + "]";
    const json& term = j["terms"][i];
    if (!term.is_object() || !term.contains("matrix")) fail(path, "expected {matrix, time_profile}");
    try {
      matrix_from_json(term["matrix"], static_cast<Index>(dim));
    } catch (const std::invalid_argument& e) {
      fail(path + ".matrix", e.what());
    }
    check_profile(term, path);
  }
  if (!j.contains("u0")) fail("$.u0", "missing");
  check_vector(j["u0"], dim, "$.u0");
  if (j.contains("source") && !j["source"].is_null()) {
    const json& src = j["source"];
    if (!src.is_array()) fail("$.source", "expected an array");
    const bool plain = !src.empty() && is_scalar(src[0]);
    if (plain) {
      check_vector(src, dim, "$.source");
    } else {
      for (std::size_t i = 0; i < src.size(); ++i) {
        const std::string path = "$.source[" + std::to_string(i) + "]";
        if (!src[i].is_object() || !src[i].contains("vector"))
          fail(path, "expected {vector, time_profile}");
        check_vector(src[i]["vector"], dim, path + ".vector");
        check_profile(src[i], path);
      }
    }
  }
  if (j.contains("shift")) {
    const json& s = j["shift"];
    const bool ok = (s.is_string() && s.get<std::string>() == "auto") ||
                    (s.is_number() && std::isfinite(s.get<double>()));
    if (!ok) fail("$.shift", "expected \"auto\" or a number");
  }
}

ProblemSpec problem_from_json(const json& j) {
  validate_problem_json(j);
  ProblemSpec spec;
  spec.dim = j["dim"].get<Index>();
  spec.horizon = j["T"].get<double>();
  for (const json& term : j["terms"]) {
    spec.terms.push_back(
        {matrix_from_json(term["matrix"], spec.dim),
         TimeProfile::parse(term.value("time_profile", std::string("const")))});
  }
  spec.initial_state = vector_from_json(j["u0"]);
  if (j.contains("source") && !j["source"].is_null()) {
    const json& src = j["source"];
    if (!src.empty() && is_scalar(src[0])) {
      spec.source.push_back({vector_from_json(src), TimeProfile::constant()});
    } else {
      for (const json& term : src)
        spec.source.push_back(
            {vector_from_json(term["vector"]),
             TimeProfile::parse(term.value("time_profile", std::string("const")))});
    }
  }
  if (j.contains("shift") && j["shift"].is_number())
    spec.shift = ShiftSpec{false, j["shift"].get<double>()};
  return spec;
}

json problem_to_json(const ProblemSpec& spec) {
  json j;
  j["dim"] = spec.dim;
  j["T"] = spec.horizon;
  j["terms"] = json::array();
  for (const auto& term : spec.terms)
    j["terms"].push_back({{"matrix", matrix_to_json(term.matrix)},
                          {"time_profile", term.profile.to_string()}});
  j["u0"] = vector_to_json(spec.initial_state);
  if (!spec.source.empty()) {
    j["source"] = json::array();
    for (const auto& term : spec.source)
      j["source"].push_back({{"vector", vector_to_json(term.vector)},
                             {"time_profile", term.profile.to_string()}});
  }
  if (spec.shift.automatic)
    j["shift"] = "auto";
  else
    j["shift"] = spec.shift.value;
  return j;
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open problem file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("problem file '" + path + "': " + e.what());
  }
  return problem_from_json(j);
}

ComplexMatrix matrix_from_json(const json& j, Index dim) {
  if (!j.is_array()) throw ValidationError("matrix: expected an array");
  const auto n = static_cast<std::size_t>(dim);
  ComplexMatrix m(dim, dim);
  bool flat = j.size() == n * n;
  if (flat)
    for (const json& e : j) flat = flat && is_scalar(e);
  if (flat) {
    for (std::size_t idx = 0; idx < n * n; ++idx)
      m(static_cast<Index>(idx / n), static_cast<Index>(idx % n)) =
          scalar_from_json(j[idx], "matrix");
    return m;
  }
  if (j.size() != n)
    throw DimensionError("matrix: expected " + std::to_string(n) + " rows or " +
                         std::to_string(n * n) + " flat entries");
  for (std::size_t r = 0; r < n; ++r) {
    if (!j[r].is_array() || j[r].size() != n)
      throw DimensionError("matrix: row " + std::to_string(r) + " has the wrong length");
    for (std::size_t c = 0; c < n; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = scalar_from_json(j[r][c], "matrix");
  }
  if (!m.allFinite()) throw ValidationError("matrix: non-finite entry");
  return m;
}

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(scalar_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexVector vector_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("vector: expected an array");
  ComplexVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Index>(i)) = scalar_from_json(j[i], "vector");
  if (!v.allFinite()) throw ValidationError("vector: non-finite entry");
  return v;
}

json vector_to_json(const ComplexVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(scalar_to_json(v(i)));
  return out;
}

ProblemSpec random_problem(const RandomInstanceOptions& options) {
  if (options.dim <= 0) throw DimensionError("random_problem: dim must be positive");
  if (options.dissipation_null_dim < 0 || options.dissipation_null_dim > options.dim)
    throw PreconditionError("random_problem: bad null dimension");
  auto rng = seeded(options.seed);
  const Index n = options.dim;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const ComplexMatrix v = Eigen::HouseholderQR<ComplexMatrix>(gaussian_matrix(n, rng))
                              .householderQ() * ComplexMatrix::Identity(n, n);
  RealVector d0 = RealVector::Zero(n), d1 = RealVector::Zero(n);
  for (Index i = options.dissipation_null_dim; i < n; ++i) {
    d0(i) = 0.2 + 0.8 * uniform(rng);
    if (options.time_dependent) d1(i) = d0(i) * (uniform(rng) - 0.5);
  }
  const double peak = (d0 + d1.cwiseAbs()).maxCoeff();
  if (peak > 0.0) {
    d0 *= options.dissipation_norm / peak;
    d1 *= options.dissipation_norm / peak;
  }
  const ComplexMatrix l0 = v * d0.cast<Complex>().asDiagonal() * v.adjoint();
  const ComplexMatrix l1 = v * d1.cast<Complex>().asDiagonal() * v.adjoint();

  const double h_share = options.time_dependent ? 0.7 : 1.0;
  const ComplexMatrix h0 = hermitian_with_norm(n, h_share * options.hamiltonian_norm, rng);
  const ComplexMatrix h1 =
      hermitian_with_norm(n, (1.0 - h_share) * options.hamiltonian_norm, rng);

  ProblemSpec spec;
  spec.dim = n;
  spec.horizon = options.horizon;
  spec.terms.push_back({ComplexMatrix((l0 + l0.adjoint()) * 0.5 +
                                      kI * (h0 + h0.adjoint()) * 0.5),
                        TimeProfile::constant()});
  if (options.time_dependent)
    spec.terms.push_back({ComplexMatrix((l1 + l1.adjoint()) * 0.5 +
                                        kI * (h1 + h1.adjoint()) * 0.5),
                          TimeProfile::sine(1.0, 0.0)});
  spec.initial_state = unit_vector(n, rng);
  if (options.with_source) {
    spec.source.push_back({unit_vector(n, rng), TimeProfile::constant()});
    if (options.time_dependent)
      spec.source.push_back({ComplexVector(0.5 * unit_vector(n, rng)),
                             TimeProfile::sine(1.0, 0.0)});
  }
  return spec;
}

ComplexMatrix random_hermitian(Index dim, double norm, std::uint64_t seed) {
  auto rng = seeded(seed);
  return hermitian_with_norm(dim, norm, rng);
}

ComplexMatrix random_matrix(Index dim, std::uint64_t seed) {
  auto rng = seeded(seed);
  return gaussian_matrix(dim, rng);
}

ComplexVector random_unit_vector(Index dim, std::uint64_t seed) {
  auto rng = seeded(seed);
  return unit_vector(dim, rng);
}

}  // namespace lchs
