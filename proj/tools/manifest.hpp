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

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lchs::cli {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

struct OutputRecord {
  std::string path;
  std::string sha256;
};

/// Files written by one run, in write order.
class OutputSet {
 public:
  void write(const std::string& path, const std::string& content);
  const std::vector<OutputRecord>& records() const { return records_; }

 private:
  std::vector<OutputRecord> records_;
};

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> args;  // argv after the program name
  nlohmann::json config;          // fully resolved options
  std::uint64_t seed = 0;
  std::string tool_version;
  double wall_time = 0.0;  // seconds; excluded from output digests
  std::vector<OutputRecord> outputs;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

}  // namespace lchs::cli
