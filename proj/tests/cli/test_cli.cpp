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

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = lchs::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(LCHS_DATA_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

// Fresh scratch directory, removed on scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("lchs_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("verify reproduces exp(-1) for the scalar problem") {
  TempDir dir;
  const Run r = invoke({"verify", "--scalar", "--K", "100", "--M", "20000", "--out", dir / "v.json"});
  REQUIRE(r.code == lchs::cli::kExitOk);
  const json v = load(dir / "v.json");
  CHECK(v["error"].get<double>() <= 1e-2);
  CHECK(fs::exists(dir / "v.json.manifest.json"));
}

TEST_CASE("decayed solutions exit with the numerical code") {
  const Run r = invoke({"solve", "--problem", data("decayed.json")});
  CHECK(r.code == lchs::cli::kExitNumerical);
  CHECK(r.err.find("decayed solution") != std::string::npos);
}

TEST_CASE("second-order Trotter sweep has slope -2") {
  TempDir dir;
  const Run r = invoke({"convergence", "--sweep", "trotter_r=4..64", "--out", dir / "c.csv"});
  REQUIRE(r.code == lchs::cli::kExitOk);
  const json fit = load(dir / "c.fit.json");
  const double slope = fit["fit"]["slope"].get<double>();
  CHECK(slope >= -2.25);
  CHECK(slope <= -1.75);
  CHECK(slurp(dir / "c.csv").rfind("trotter_r,error\n", 0) == 0);
}

TEST_CASE("input errors exit with the validation code") {
  CHECK(invoke({"solve", "--bogus"}).code == lchs::cli::kExitValidation);
  CHECK(invoke({}).code == lchs::cli::kExitValidation);
  CHECK(invoke({"solve", "--problem", "/nonexistent.json"}).code == lchs::cli::kExitValidation);
  CHECK(invoke({"solve", "--problem", data("scalar_decay.json"), "--eps", "2"}).code ==
        lchs::cli::kExitValidation);
  CHECK(invoke({"estimate", "--problem", data("scalar_source.json"), "--observable",
              data("observable4.json")})
            .code == lchs::cli::kExitValidation);
  CHECK(invoke({"plan", "--mode", "xx", "--problem", data("scalar_decay.json")}).code ==
        lchs::cli::kExitValidation);
}

TEST_CASE("seeded runs are byte-identical and replay") {
  TempDir dir;
  const std::vector<std::string> common{"estimate", "--problem", data("random_ti4.json"),
                                        "--observable", data("observable4.json"),
                                        "--eps", "0.2", "--seed", "42"};
  auto with_out = [&](const std::string& name) {
    std::vector<std::string> args = common;
    args.push_back("--out");
    args.push_back(dir / name);
    return invoke(args);
  };
  REQUIRE(with_out("a.json").code == lchs::cli::kExitOk);
  REQUIRE(with_out("b.json").code == lchs::cli::kExitOk);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));

  const json ma = load(dir / "a.json.manifest.json");
  const json mb = load(dir / "b.json.manifest.json");
  CHECK(ma["subcommand"] == "estimate");
  CHECK(ma["seed"] == 42);
  CHECK(ma["config"] == mb["config"]);
  CHECK(ma["outputs"][0]["sha256"] == mb["outputs"][0]["sha256"]);
  CHECK(ma["outputs"][0]["sha256"].get<std::string>().size() == 64);

  const Run replay = invoke({"replay", dir / "a.json.manifest.json"});
  CHECK(replay.code == lchs::cli::kExitOk);
  CHECK(replay.out.find("match    " + (dir / "a.json")) != std::string::npos);

  std::ofstream(dir / "a.json", std::ios::app) << " ";
  json tampered = ma;
  tampered["outputs"][0]["sha256"] = std::string(64, '0');
  std::ofstream(dir / "t.manifest.json") << tampered.dump();
  const Run bad = invoke({"replay", dir / "t.manifest.json"});
  CHECK(bad.code == lchs::cli::kExitFailure);
  CHECK(bad.out.find("MISMATCH " + (dir / "a.json")) != std::string::npos);
}

TEST_CASE("plan prints an analytic bound") {
  const Run r = invoke({"plan", "--problem", data("random_ti4.json"), "--mode", "ti"});
  REQUIRE(r.code == lchs::cli::kExitOk);
  CHECK(r.out.find("analytic bound, constants=1") != std::string::npos);
  const Run k = invoke({"plan", "--problem", data("random_ti4.json"), "--constants",
                      data("constants_example.json")});
  REQUIRE(k.code == lchs::cli::kExitOk);
  CHECK(k.out.find("constants from override") != std::string::npos);
}
