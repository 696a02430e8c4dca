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

#ifndef QDT_LLM_HPP_
#define QDT_LLM_HPP_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace qdt {

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

nlohmann::json message_to_json(const ChatMessage& m);
ChatMessage message_from_json(const nlohmann::json& j);

/// A chat-completion model. complete() must be reentrant.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// `history` starts with a system message. Throws kTransport or
  /// kScriptExhausted.
  virtual ChatMessage complete(const std::vector<ChatMessage>& history) const = 0;
};

/// One scripted reply. Turn entries match the number of assistant
/// messages already in the history; contains entries match a substring of
/// the last user message (or of any user message when `any_user_message`).
struct ScriptEntry {
  enum class Match { kTurn, kContains };
  Match match = Match::kTurn;
  std::size_t turn = 0;
  std::string needle;
  bool any_user_message = false;
  std::string respond;
};

struct Script {
  std::vector<ScriptEntry> entries;

  /// Accepts {"entries": [...]} or a bare array. Entries use "turn": N or
  /// "contains": "text" (or "match": N | "text"), plus "respond". An empty
  /// file is an empty script. Duplicate turns are a load error.
  static Script from_json(const nlohmann::json& j);
  static Script load(const std::filesystem::path& path);
};

/// Deterministic backend: a pure function of (history, script).
/// Turn-index entries take precedence; contains entries are tried in order.
class ScriptedBackend : public ChatBackend {
 public:
  explicit ScriptedBackend(Script script);
  ChatMessage complete(const std::vector<ChatMessage>& history) const override;

 private:
  Script script_;
};

struct BackendConfig {
  enum class Kind { kLive, kScripted };

  Kind kind = Kind::kScripted;
  // live
  std::string endpoint;  // full chat-completions URL
  std::string model;
  std::string api_key_env;  // name of the environment variable holding the key
  nlohmann::json parameters = nlohmann::json::object();  // passed through (temperature, ...)
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};
  // scripted
  std::filesystem::path script;

  /// Throws kInvalidArgument when a field required by `kind` is missing.
  void validate() const;
  static BackendConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static BackendConfig load(const std::filesystem::path& path);
};

/// Chat-completions over HTTP: POST {model, messages, ...parameters},
/// reads choices[0].message.content. Retries transport failures, 429 and
/// 5xx with exponential backoff.
class LiveBackend : public ChatBackend {
 public:
  explicit LiveBackend(BackendConfig config);
  ChatMessage complete(const std::vector<ChatMessage>& history) const override;

 private:
  BackendConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config);

}  // namespace qdt

#endif  // QDT_LLM_HPP_
