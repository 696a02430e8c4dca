// Copyright 2026 The QDT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <set>

#include "qdt/cli.hpp"
#include "qdt/error.hpp"
#include "qdt/schema.hpp"

namespace qdt {

using nlohmann::json;

const std::map<std::string, std::string>& Settings::known_keys() {
  static const std::map<std::string, std::string> keys = {
      {"audit_log", "qdt_audit.ndjson"},
      {"backend", ""},
      {"bind", "127.0.0.1"},
      {"budget", "8"},
      {"csv", ""},
      {"gateway_url", "http://127.0.0.1:8080"},
      {"mask_fraction", "0"},
      {"mask_seed", "0"},
      {"max_error_fraction", "0.25"},
      {"mode", "qdt"},
      {"out_dir", "qdt_run"},
      {"parallelism", "1"},
      {"policy", ""},
      {"port", "8080"},
      {"query_timeout_ms", "5000"},
      {"schema", ""},
      {"split_seed", "42"},
      {"store", "qdt_store.db"},
      {"test_size", "50"},
      {"transcript", ""},
  };
  return keys;
}

namespace {

const std::set<std::string>& path_keys() {
  static const std::set<std::string> keys = {"audit_log", "backend", "csv",   "out_dir",
                                             "policy",    "schema",  "store", "transcript"};
  return keys;
}

std::string scalar_text(const json& v, const std::string& key, const std::string& file) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw Error(ErrorCode::kInvalidArgument, file + ": setting '" + key + "' must be a string, number or boolean");
}

}  // namespace

std::string Settings::env_name(const std::string& key) { return "QDT_" + to_upper(key); }

Settings Settings::resolve(const std::map<std::string, std::string>& flags, const EnvLookup& env,
                           const std::string& config_path, const std::string& config_source) {
  Settings s;
  for (const auto& [key, fallback] : known_keys()) {
    if (!fallback.empty()) s.values_[key] = {fallback, "default"};
  }
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorCode::kNotFound, "cannot open config file " + config_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, config_path + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::kParse, config_path + ": config must be a JSON object");
    const auto base = std::filesystem::path(config_path).parent_path();
    for (const auto& [key, v] : j.items()) {
      if (!known_keys().count(key)) {
        throw Error(ErrorCode::kInvalidArgument, config_path + ": unknown setting '" + key + "'");
      }
      std::string text = scalar_text(v, key, config_path);
      if (path_keys().count(key) && !text.empty() && std::filesystem::path(text).is_relative()) {
        text = (base / text).lexically_normal().string();
      }
      s.values_[key] = {std::move(text), "file " + config_path + config_source};
    }
  }
  for (const auto& [key, fallback] : known_keys()) {
    if (auto v = env(env_name(key))) s.values_[key] = {*v, "env " + env_name(key)};
  }
  for (const auto& [key, value] : flags) s.values_[key] = {value, "flag"};
  return s;
}

bool Settings::has(const std::string& key) const {
  const auto it = values_.find(key);
  return it != values_.end() && !it->second.value.empty();
}

const std::string& Settings::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.value.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "missing setting '" + key + "' (flag --" + key + ", environment " +
                                                 env_name(key) + ", or config file)");
  }
  return it->second.value;
}

std::string Settings::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

long long Settings::get_int(const std::string& key) const {
  const std::string& text = get(key);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, "setting '" + key + "' must be an integer, got '" + text + "'");
}

double Settings::get_double(const std::string& key) const {
  const std::string& text = get(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, "setting '" + key + "' must be a number, got '" + text + "'");
}

bool Settings::get_bool(const std::string& key) const {
  const std::string text = to_lower(get_or(key, "false"));
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  throw Error(ErrorCode::kInvalidArgument, "setting '" + key + "' must be a boolean, got '" + text + "'");
}

void Settings::print(std::ostream& out) const {
  for (const auto& [key, v] : values_) out << key << " = " << v.value << "  [" << v.source << "]\n";
}

}  // namespace qdt
