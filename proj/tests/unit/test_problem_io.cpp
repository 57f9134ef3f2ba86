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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "lchs/problem_io.hpp"

using namespace lchs;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({"dim": 2, "T": 1.0,
    "terms": [{"matrix": [[1, 0], [0, [2, 1]]], "time_profile": "const"}],
    "u0": [1, [0, 1]]})");
}

std::string error_of(const json& j) {
  try {
    problem_from_json(j);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("time profiles") {
  CHECK(TimeProfile::parse("const")(3.7) == 1.0);
  const TimeProfile p = TimeProfile::parse("poly:1,2,3");
  CHECK(p(2.0) == 1.0 + 2.0 * 2.0 + 3.0 * 4.0);
  const TimeProfile s = TimeProfile::parse("sin:2,0.5");
  CHECK(s(0.3) == doctest::Approx(std::sin(2.0 * 0.3 + 0.5)));
  CHECK(TimeProfile::parse(p.to_string())(1.5) == p(1.5));
  CHECK(TimeProfile::parse(s.to_string())(1.5) == s(1.5));
  CHECK_THROWS_AS(TimeProfile::parse("cos:1"), ValidationError);
  CHECK_THROWS_AS(TimeProfile::parse("sin:1"), ValidationError);
  CHECK_THROWS_AS(TimeProfile::parse("poly:1,x"), ValidationError);
  CHECK_THROWS_AS(TimeProfile::parse("poly:"), ValidationError);
}

TEST_CASE("flat and row-major matrices agree") {
  const json rows = json::parse("[[1, [0, 2]], [3, 4]]");
  const json flat = json::parse("[1, [0, 2], 3, 4]");
  const ComplexMatrix a = matrix_from_json(rows, 2), b = matrix_from_json(flat, 2);
  CHECK(a == b);
  CHECK(a(0, 1) == Complex(0.0, 2.0));
  CHECK(a(1, 0) == Complex(3.0, 0.0));
  CHECK(matrix_from_json(matrix_to_json(a), 2) == a);
  CHECK_THROWS_AS(matrix_from_json(json::parse("[1, 2, 3]"), 2), DimensionError);
  CHECK_THROWS_AS(matrix_from_json(json::parse("[[1, 2], [3]]"), 2), DimensionError);
  CHECK_THROWS_AS(matrix_from_json(json::parse("[[1, \"a\"], [3, 4]]"), 2), ValidationError);
}

TEST_CASE("problem round trip") {
  RandomInstanceOptions opt;
  opt.seed = 9;
  opt.dim = 3;
  opt.time_dependent = true;
  opt.with_source = true;
  const ProblemSpec spec = random_problem(opt);
  const ProblemSpec back = problem_from_json(json::parse(problem_to_json(spec).dump()));
  CHECK(back.dim == spec.dim);
  CHECK(back.horizon == spec.horizon);
  REQUIRE(back.terms.size() == spec.terms.size());
  for (std::size_t i = 0; i < spec.terms.size(); ++i) {
    CHECK(back.terms[i].matrix == spec.terms[i].matrix);
    CHECK(back.terms[i].profile.to_string() == spec.terms[i].profile.to_string());
  }
  CHECK(back.initial_state == spec.initial_state);
  REQUIRE(back.source.size() == spec.source.size());
  CHECK(back.shift.automatic);
  const ProblemInstance a = spec.instance(), b = back.instance();
  for (double t : {0.0, 0.4, 1.0}) {
    CHECK(a.generator.a(t) == b.generator.a(t));
    CHECK((*a.source)(t) == (*b.source)(t));
  }
}

TEST_CASE("random problems are seeded and shaped as requested") {
  RandomInstanceOptions opt;
  opt.seed = 3;
  opt.dim = 5;
  opt.dissipation_null_dim = 2;
  opt.hamiltonian_norm = 2.0;
  const ProblemInstance p = random_problem(opt).instance();
  const ProblemInstance q = random_problem(opt).instance();
  CHECK(p.generator.a(0.0) == q.generator.a(0.0));
  const HermitianSplit s = hermitian_split(p.generator.a(0.0));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s.dissipative);
  CHECK(std::abs(es.eigenvalues()[0]) < 1e-12);
  CHECK(std::abs(es.eigenvalues()[1]) < 1e-12);
  CHECK(es.eigenvalues()[2] > 0.1);
  CHECK(spectral_norm(s.dissipative) == doctest::Approx(1.0));
  CHECK(spectral_norm(s.hamiltonian) == doctest::Approx(2.0));
  CHECK(p.initial_state.norm() == doctest::Approx(1.0));
  opt.seed = 4;
  CHECK(random_problem(opt).instance().generator.a(0.0) != p.generator.a(0.0));
}

TEST_CASE("source forms") {
  json j = minimal();
  j["source"] = json::parse("[1, 2]");
  const ProblemSpec plain = problem_from_json(j);
  REQUIRE(plain.source.size() == 1);
  CHECK(plain.source[0].profile.kind() == TimeProfile::Kind::Constant);
  j["source"] = json::parse(R"([{"vector": [1, 0]}, {"vector": [0, 1], "time_profile": "poly:0,1"}])");
  const ProblemInstance inst = problem_from_json(j).instance();
  const ComplexVector b = (*inst.source)(2.0);
  CHECK(b[0] == Complex(1.0));
  CHECK(b[1] == Complex(2.0));
  j["source"] = nullptr;
  CHECK(problem_from_json(j).source.empty());
  j["shift"] = 0.5;
  const ProblemSpec fixed = problem_from_json(j);
  CHECK_FALSE(fixed.shift.automatic);
  CHECK(fixed.shift.value == 0.5);
}

TEST_CASE("validation errors carry JSON paths") {
  json j = minimal();
  CHECK(error_of(j).empty());
  j.erase("dim");
  CHECK(error_of(j).find("$.dim") == 0);
  j = minimal();
  j["T"] = -1.0;
  CHECK(error_of(j).find("$.T") == 0);
  j = minimal();
  j["terms"] = json::array();
  CHECK(error_of(j).find("$.terms") == 0);
  j = minimal();
  j["terms"][0]["matrix"] = json::parse("[[1, 2, 3], [4, 5, 6]]");
  CHECK(error_of(j).find("$.terms[0].matrix") == 0);
  j = minimal();
  j["terms"][0]["time_profile"] = "tan:1";
  CHECK(error_of(j).find("$.terms[0].time_profile") == 0);
  j = minimal();
  j["u0"] = json::parse("[1, 2, 3]");
  CHECK(error_of(j).find("$.u0") == 0);
  j = minimal();
  j["u0"] = json::parse("[1, \"x\"]");
  CHECK(error_of(j).find("$.u0[1]") == 0);
  j = minimal();
  j["source"] = json::parse(R"([{"vector": [1]}])");
  CHECK(error_of(j).find("$.source[0].vector") == 0);
  j = minimal();
  j["shift"] = "manual";
  CHECK(error_of(j).find("$.shift") == 0);
  CHECK_THROWS_AS(problem_from_json(json::array()), ValidationError);
}

TEST_CASE("bundled data files load") {
  namespace fs = std::filesystem;
  int problems = 0;
  for (const auto& entry : fs::directory_iterator(LCHS_DATA_DIR)) {
    const std::string name = entry.path().filename().string();
    if (name == "observable4.json" || name == "constants_example.json") continue;
    CAPTURE(name);
    const ProblemSpec spec = load_problem(entry.path().string());
    CHECK_NOTHROW(spec.instance());
    ++problems;
  }
  CHECK(problems >= 7);
  const ProblemSpec qubit = load_problem(std::string(LCHS_DATA_DIR) + "/qubit_driven.json");
  CHECK(qubit.terms.size() == 3);
  CHECK(qubit.terms[0].matrix(1, 1) == Complex(0.1));
  CHECK_THROWS_AS(load_problem("/nonexistent/problem.json"), ValidationError);
}
