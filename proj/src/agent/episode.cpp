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

#include "qdt/agent.hpp"
#include "qdt/error.hpp"

namespace qdt {

using nlohmann::json;

namespace {

std::vector<ChatMessage> history_of(const EpisodeState& state) {
  std::vector<ChatMessage> history;
  history.reserve(state.messages.size());
  for (const auto& m : state.messages) history.push_back(m.message);
  return history;
}

void append(EpisodeState& state, std::string role, std::string content, MessageOrigin origin) {
  state.messages.push_back({ChatMessage{std::move(role), std::move(content)}, origin});
}

const std::string& ask(EpisodeState& state, const ChatBackend& backend) {
  ChatMessage reply = backend.complete(history_of(state));
  append(state, "assistant", std::move(reply.content), MessageOrigin::kModel);
  return state.messages.back().message.content;
}

Prediction finish(const TestRecord& record, Mode mode, const TaskSpec& task, EpisodeState state,
                  std::optional<std::string> label) {
  Prediction p;
  p.record_id = record.record_id;
  p.mode = mode;
  p.fallback_used = !label.has_value();
  p.label = label ? *label : task.negative_label();
  for (auto it = state.messages.rbegin(); it != state.messages.rend(); ++it) {
    if (it->origin == MessageOrigin::kModel) {
      p.rationale = it->message.content;
      break;
    }
  }
  p.queries_issued = state.queries_issued;
  p.queries_approved = state.queries_approved;
  p.transcript = std::move(state.messages);
  return p;
}

}  // namespace

json Prediction::transcript_json() const {
  json messages = json::array();
  for (const auto& m : transcript) {
    messages.push_back({{"role", m.message.role}, {"origin", to_string(m.origin)}, {"content", m.message.content}});
  }
  json calls = json::array();
  for (const auto& call : gateway_calls) {
    json response = call.response.to_json();
    response.erase("elapsed_ms");
    calls.push_back({{"sql", call.sql}, {"response", std::move(response)}});
  }
  return {{"record_id", record_id},
          {"mode", to_string(mode)},
          {"label", label},
          {"fallback_used", fallback_used},
          {"queries_issued", queries_issued},
          {"queries_approved", queries_approved},
          {"messages", std::move(messages)},
          {"gateway_calls", std::move(calls)}};
}

void Prediction::write_transcript(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write transcript " + path.string());
  out << transcript_json().dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing transcript " + path.string());
}

QdtAgent::QdtAgent(TaskSpec task, GatewayClient& gateway, const ChatBackend& backend, std::size_t budget)
    : task_(std::move(task)), gateway_(gateway), backend_(backend), budget_(budget) {
  task_.validate();
  const json schema = gateway_.schema();
  try {
    system_prompt_ = build_system_prompt(catalog_from_json(schema.at("catalog")),
                                         PolicyConfig::from_json(schema.at("policy")), task_, budget_);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kTransport, std::string("malformed schema response: ") + e.what());
  }
}

Prediction QdtAgent::run(const TestRecord& record) const {
  EpisodeState state;
  state.budget_remaining = budget_;
  append(state, "system", system_prompt_.content, MessageOrigin::kProtocol);
  append(state, "user", build_record_message(record).content, MessageOrigin::kProtocol);
  std::vector<GatewayExchange> calls;
  bool reprompted = false;
  bool final_turn = false;

  auto done = [&](std::optional<std::string> label) {
    state.terminal = true;
    Prediction p = finish(record, Mode::kQdt, task_, std::move(state), std::move(label));
    p.gateway_calls = std::move(calls);
    return p;
  };

  while (true) {
    const Action action = parse_action(ask(state, backend_), task_);
    if (const auto* answer = std::get_if<FinalAnswer>(&action)) return done(answer->label);
    if (final_turn) return done(std::nullopt);

    if (std::holds_alternative<Malformed>(action)) {
      if (reprompted) return done(std::nullopt);
      reprompted = true;
      append(state, "user", std::string(kReprompt), MessageOrigin::kProtocol);
      continue;
    }

    const auto& sql = std::get<QueryAction>(action).sql;
    if (state.budget_remaining == 0) {
      final_turn = true;
      append(state, "user", std::string(kBudgetExhausted), MessageOrigin::kProtocol);
      continue;
    }
    QueryResponse response = gateway_.query(QueryRequest{record.record_id, sql});
    ++state.queries_issued;
    --state.budget_remaining;
    if (response.status == QueryResponse::Status::kApproved) ++state.queries_approved;
    append(state, "user", render_query_response(response), MessageOrigin::kGateway);
    calls.push_back({sql, std::move(response)});
    if (state.budget_remaining == 0) {
      final_turn = true;
      append(state, "user", std::string(kBudgetExhausted), MessageOrigin::kProtocol);
    }
  }
}

Prediction run_episode(const TestRecord& record, const TaskSpec& task, GatewayClient& gateway,
                       const ChatBackend& backend, std::size_t budget) {
  return QdtAgent(task, gateway, backend, budget).run(record);
}

Prediction run_llm_only(const TestRecord& record, const TaskSpec& task, const ChatBackend& backend) {
  EpisodeState state;
  append(state, "system", build_llm_only_prompt(task).content, MessageOrigin::kProtocol);
  append(state, "user", build_record_message(record).content, MessageOrigin::kProtocol);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const Action action = parse_action(ask(state, backend), task);
    if (const auto* answer = std::get_if<FinalAnswer>(&action)) {
      state.terminal = true;
      return finish(record, Mode::kLlmOnly, task, std::move(state), answer->label);
    }
    if (attempt == 0) append(state, "user", std::string(kRepromptLlmOnly), MessageOrigin::kProtocol);
  }
  state.terminal = true;
  return finish(record, Mode::kLlmOnly, task, std::move(state), std::nullopt);
}

}  // namespace qdt
