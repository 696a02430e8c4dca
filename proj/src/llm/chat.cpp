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

#include <fstream>

#include "qdt/error.hpp"
#include "qdt/llm.hpp"

namespace qdt {

using nlohmann::json;

json message_to_json(const ChatMessage& m) { return {{"role", m.role}, {"content", m.content}}; }

ChatMessage message_from_json(const json& j) {
  try {
    return ChatMessage{j.at("role").get<std::string>(), j.at("content").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("chat message: ") + e.what());
  }
}

void BackendConfig::validate() const {
  if (kind == Kind::kScripted) {
    if (script.empty()) throw Error(ErrorCode::kInvalidArgument, "scripted backend needs a script path");
    return;
  }
  if (endpoint.empty()) throw Error(ErrorCode::kInvalidArgument, "live backend needs an endpoint");
  if (model.empty()) throw Error(ErrorCode::kInvalidArgument, "live backend needs a model");
  if (max_retries < 0) throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
}

BackendConfig BackendConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  BackendConfig cfg;
  try {
    const std::string kind = j.value("kind", "scripted");
    if (kind == "live") {
      cfg.kind = Kind::kLive;
    } else if (kind == "scripted") {
      cfg.kind = Kind::kScripted;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown backend kind '" + kind + "'");
    }
    cfg.endpoint = j.value("endpoint", "");
    cfg.model = j.value("model", "");
    cfg.api_key_env = j.value("api_key_env", "");
    if (j.contains("parameters")) cfg.parameters = j.at("parameters");
    cfg.timeout = std::chrono::milliseconds(j.value("timeout_ms", cfg.timeout.count()));
    cfg.max_retries = j.value("max_retries", cfg.max_retries);
    cfg.backoff = std::chrono::milliseconds(j.value("backoff_ms", cfg.backoff.count()));
    if (j.contains("script")) {
      std::filesystem::path script = j.at("script").get<std::string>();
      cfg.script = script.is_relative() && !base_dir.empty() ? base_dir / script : script;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("backend config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

BackendConfig BackendConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open backend config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == BackendConfig::Kind::kScripted) {
    return std::make_unique<ScriptedBackend>(Script::load(config.script));
  }
  return std::make_unique<LiveBackend>(config);
}

}  // namespace qdt
