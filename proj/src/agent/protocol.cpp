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

#include <algorithm>
#include <cctype>
#include <sstream>

#include "qdt/agent.hpp"
#include "qdt/error.hpp"

namespace qdt {

namespace {

constexpr std::string_view kFence = "```";

std::string_view trim(std::string_view s, std::string_view chars = " \t\r\n") {
  const auto begin = s.find_first_not_of(chars);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(chars);
  return s.substr(begin, end - begin + 1);
}

std::optional<std::string> first_sql_block(std::string_view text) {
  std::size_t pos = 0;
  while ((pos = text.find(kFence, pos)) != std::string_view::npos) {
    std::size_t tag_end = pos + kFence.size();
    while (tag_end < text.size() && std::isalnum(static_cast<unsigned char>(text[tag_end]))) ++tag_end;
    const std::string tag = to_lower(text.substr(pos + kFence.size(), tag_end - pos - kFence.size()));
    const auto close = text.find(kFence, tag_end);
    if (close == std::string_view::npos) return std::nullopt;
    const bool separated = tag_end == text.size() || std::isspace(static_cast<unsigned char>(text[tag_end]));
    if (tag == "sql" && separated) return std::string(trim(text.substr(tag_end, close - tag_end)));
    pos = close + kFence.size();
  }
  return std::nullopt;
}

}  // namespace

Action parse_action(std::string_view assistant_text, const TaskSpec& task) {
  if (auto sql = first_sql_block(assistant_text)) return QueryAction{std::move(*sql)};
  std::optional<std::string> answer;
  std::size_t start = 0;
  while (start <= assistant_text.size()) {
    auto end = assistant_text.find('\n', start);
    if (end == std::string_view::npos) end = assistant_text.size();
    const auto line = trim(assistant_text.substr(start, end - start), " \t\r*`");
    for (std::size_t i = 0; i < task.answer_markers.size(); ++i) {
      if (line == task.answer_markers[i]) answer = task.label_space[i];
    }
    start = end + 1;
  }
  if (answer) return FinalAnswer{std::move(*answer)};
  return Malformed{};
}

std::string render_query_response(const QueryResponse& response) {
  std::ostringstream out;
  if (response.status == QueryResponse::Status::kRejected) {
    out << "QUERY REJECTED:\n";
    for (const auto& v : response.violations) out << "- " << to_string(v.code) << ": " << v.message << '\n';
    return out.str();
  }
  if (response.execution_error) {
    out << "QUERY FAILED: " << response.execution_error->code << ": " << response.execution_error->message << '\n';
    return out.str();
  }
  out << "QUERY RESULT (" << response.rows.size() << (response.rows.size() == 1 ? " row" : " rows")
      << ", suppressed_groups: " << response.suppressed_groups << ")\n";
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> widths;
  for (const auto& c : response.columns) widths.push_back(c.size());
  for (const auto& row : response.rows) {
    auto& line = cells.emplace_back();
    for (std::size_t i = 0; i < row.size() && i < widths.size(); ++i) {
      line.push_back(format_value(row[i]));
      widths[i] = std::max(widths[i], line.back().size());
    }
  }
  auto emit = [&](const std::vector<std::string>& fields) {
    std::string text;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const std::string field = i < fields.size() ? fields[i] : std::string();
      if (i) text += " | ";
      text += field;
      if (i + 1 < widths.size()) text.append(widths[i] - field.size(), ' ');
    }
    out << text << '\n';
  };
  emit(response.columns);
  std::string rule;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) rule += "-+-";
    rule.append(widths[i], '-');
  }
  out << rule << '\n';
  for (const auto& line : cells) emit(line);
  if (response.rows.empty()) out << "(no rows)\n";
  if (response.truncated) out << "(result truncated to " << response.rows.size() << " rows)\n";
  return out.str();
}

std::string_view to_string(MessageOrigin origin) {
  switch (origin) {
    case MessageOrigin::kProtocol: return "protocol";
    case MessageOrigin::kGateway: return "gateway";
    case MessageOrigin::kModel: return "model";
  }
  return "protocol";
}

std::string_view to_string(Mode mode) { return mode == Mode::kQdt ? "qdt" : "llm_only"; }

Mode mode_from_string(std::string_view name) {
  if (name == "qdt") return Mode::kQdt;
  if (name == "llm_only" || name == "llm-only") return Mode::kLlmOnly;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(name) + "' (expected qdt or llm_only)");
}

}  // namespace qdt
