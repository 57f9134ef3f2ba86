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

#include "manifest.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "lchs/types.hpp"

namespace lchs::cli {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

void OutputSet::write(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << content;
  out.close();
  if (!out) throw ValidationError("failed writing '" + path + "'");
  records_.push_back({path, sha256_hex(content)});
}

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& o : m.outputs) outputs.push_back({{"path", o.path}, {"sha256", o.sha256}});
  return {{"subcommand", m.subcommand}, {"args", m.args},
          {"config", m.config},         {"seed", m.seed},
          {"tool_version", m.tool_version}, {"wall_time_seconds", m.wall_time},
          {"outputs", outputs}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  auto need = [&j](const char* key) -> const nlohmann::json& {
    if (!j.is_object() || !j.contains(key))
      throw ValidationError(std::string("manifest: missing '") + key + "'");
    return j.at(key);
  };
  RunManifest m;
  try {
    m.subcommand = need("subcommand").get<std::string>();
    m.args = need("args").get<std::vector<std::string>>();
    m.config = need("config");
    m.seed = need("seed").get<std::uint64_t>();
    m.tool_version = need("tool_version").get<std::string>();
    m.wall_time = need("wall_time_seconds").get<double>();
    for (const auto& o : need("outputs"))
      m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
  return m;
}

}  // namespace lchs::cli
