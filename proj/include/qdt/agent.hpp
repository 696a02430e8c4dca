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

#ifndef QDT_AGENT_HPP_
#define QDT_AGENT_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qdt/gateway.hpp"
#include "qdt/llm.hpp"
#include "qdt/policy.hpp"
#include "qdt/schema.hpp"
#include "qdt/store.hpp"

namespace qdt {

inline constexpr std::size_t kDefaultQueryBudget = 8;

struct TaskSpec {
  std::string task_prompt;
  std::vector<std::string> label_space;  // ordered; the first non-positive label is the fallback
  std::string positive_label;
  std::vector<std::string> answer_markers;  // parallel to label_space

  /// Throws kInvalidArgument on a broken invariant.
  void validate() const;
  const std::string& negative_label() const;
  /// 1 for the positive label, 0 otherwise.
  int binary(const std::string& label) const;

  static TaskSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// 30-day readmission over labels {"0", "1"} with markers "ANSWER: 0|1".
TaskSpec readmission_task(const TableMeta& table);

// ---- prompts --------------------------------------------------------------

/// Replaces every {{name}} in `tmpl`. Throws kInternal for a placeholder
/// without a value.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

ChatMessage build_system_prompt(const SchemaCatalog& catalog, const PolicyConfig& policy, const TaskSpec& task,
                                std::size_t budget);
ChatMessage build_llm_only_prompt(const TaskSpec& task);

/// Present features only, "key: value" per line in key order.
std::string render_test_record(const TestRecord& record);
ChatMessage build_record_message(const TestRecord& record);

// ---- protocol -------------------------------------------------------------

struct QueryAction {
  std::string sql;
};
struct FinalAnswer {
  std::string label;
};
struct Malformed {};
using Action = std::variant<QueryAction, FinalAnswer, Malformed>;

/// The first fenced sql block wins; otherwise the last line equal to an
/// answer marker; otherwise Malformed.
Action parse_action(std::string_view assistant_text, const TaskSpec& task);

/// The gateway's reply as shown to the model: a fixed-width table, a
/// "QUERY REJECTED:" list or a "QUERY FAILED:" notice.
std::string render_query_response(const QueryResponse& response);

inline constexpr std::string_view kReprompt =
    "Your reply did not follow the protocol. Respond with a fenced sql block or a final ANSWER line.";
inline constexpr std::string_view kRepromptLlmOnly =
    "Your reply did not follow the protocol. End your reply with a final ANSWER line.";
inline constexpr std::string_view kBudgetExhausted = "No queries remain; answer now.";

// ---- episodes -------------------------------------------------------------

enum class MessageOrigin { kProtocol, kGateway, kModel };
std::string_view to_string(MessageOrigin origin);

struct TranscriptMessage {
  ChatMessage message;
  MessageOrigin origin = MessageOrigin::kProtocol;
};

struct GatewayExchange {
  std::string sql;
  QueryResponse response;
};

struct EpisodeState {
  std::vector<TranscriptMessage> messages;
  std::size_t queries_issued = 0;
  std::size_t queries_approved = 0;
  std::size_t budget_remaining = 0;
  bool terminal = false;
};

enum class Mode { kQdt, kLlmOnly };
std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);

struct Prediction {
  std::string record_id;
  Mode mode = Mode::kQdt;
  std::string label;
  std::string rationale;  // final assistant text
  bool fallback_used = false;
  std::size_t queries_issued = 0;
  std::size_t queries_approved = 0;
  std::vector<TranscriptMessage> transcript;
  std::vector<GatewayExchange> gateway_calls;

  /// Stable across runs: no timings.
  nlohmann::json transcript_json() const;
  void write_transcript(const std::filesystem::path& path) const;
};

/// One prepared QDT agent. The schema is fetched once at construction;
/// run() is reentrant so episodes may share an agent across threads.
class QdtAgent {
 public:
  QdtAgent(TaskSpec task, GatewayClient& gateway, const ChatBackend& backend,
           std::size_t budget = kDefaultQueryBudget);

  /// Throws on backend or gateway transport failure.
  Prediction run(const TestRecord& record) const;
  const ChatMessage& system_prompt() const { return system_prompt_; }

 private:
  TaskSpec task_;
  GatewayClient& gateway_;
  const ChatBackend& backend_;
  std::size_t budget_;
  ChatMessage system_prompt_;
};

Prediction run_episode(const TestRecord& record, const TaskSpec& task, GatewayClient& gateway,
                       const ChatBackend& backend, std::size_t budget = kDefaultQueryBudget);

/// Task prompt plus record, no schema and no gateway.
Prediction run_llm_only(const TestRecord& record, const TaskSpec& task, const ChatBackend& backend);

}  // namespace qdt

#endif  // QDT_AGENT_HPP_
