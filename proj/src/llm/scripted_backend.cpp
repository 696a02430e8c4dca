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
#include <fstream>
#include <set>
#include <sstream>

#include "qdt/error.hpp"
#include "qdt/llm.hpp"

namespace qdt {

using nlohmann::json;

Script Script::from_json(const json& j) {
  Script script;
  const json* list = &j;
  if (j.is_object()) {
    if (!j.contains("entries")) throw Error(ErrorCode::kParse, "script object needs an 'entries' array");
    list = &j.at("entries");
  }
  if (!list->is_array()) throw Error(ErrorCode::kParse, "script entries must be an array");
  std::set<std::size_t> turns;
  std::size_t index = 0;
  for (const auto& e : *list) {
    const std::string where = "script entry " + std::to_string(index++);
    if (!e.is_object() || !e.contains("respond") || !e.at("respond").is_string()) {
      throw Error(ErrorCode::kParse, where + ": needs a string 'respond'");
    }
    ScriptEntry entry;
    entry.respond = e.at("respond").get<std::string>();
    const json* match = nullptr;
    if (e.contains("turn")) match = &e.at("turn");
    if (e.contains("contains")) match = &e.at("contains");
    if (e.contains("match")) match = &e.at("match");
    if (!match) throw Error(ErrorCode::kParse, where + ": needs 'turn' or 'contains'");
    if (match->is_number_unsigned()) {
      entry.match = ScriptEntry::Match::kTurn;
      entry.turn = match->get<std::size_t>();
      if (!turns.insert(entry.turn).second) {
        throw Error(ErrorCode::kParse, where + ": duplicate turn index " + std::to_string(entry.turn));
      }
    } else if (match->is_string()) {
      entry.match = ScriptEntry::Match::kContains;
      entry.needle = match->get<std::string>();
      const std::string scope = e.value("in", "last");
      if (scope != "last" && scope != "any") {
        throw Error(ErrorCode::kParse, where + ": 'in' must be \"last\" or \"any\"");
      }
      entry.any_user_message = scope == "any";
    } else {
      throw Error(ErrorCode::kParse, where + ": match must be a non-negative integer or a string");
    }
    script.entries.push_back(std::move(entry));
  }
  return script;
}

Script Script::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open script " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) return {};
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

ScriptedBackend::ScriptedBackend(Script script) : script_(std::move(script)) {}

ChatMessage ScriptedBackend::complete(const std::vector<ChatMessage>& history) const {
  const auto turn = static_cast<std::size_t>(
      std::count_if(history.begin(), history.end(), [](const ChatMessage& m) { return m.role == "assistant"; }));
  for (const auto& e : script_.entries) {
    if (e.match == ScriptEntry::Match::kTurn && e.turn == turn) return {"assistant", e.respond};
  }
  const ChatMessage* last_user = nullptr;
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (it->role == "user") {
      last_user = &*it;
      break;
    }
  }
  for (const auto& e : script_.entries) {
    if (e.match != ScriptEntry::Match::kContains) continue;
    if (e.any_user_message) {
      const bool hit = std::any_of(history.begin(), history.end(), [&](const ChatMessage& m) {
        return m.role == "user" && m.content.find(e.needle) != std::string::npos;
      });
      if (hit) return {"assistant", e.respond};
    } else if (last_user && last_user->content.find(e.needle) != std::string::npos) {
      return {"assistant", e.respond};
    }
  }
  throw Error(ErrorCode::kScriptExhausted, "script has no entry for turn " + std::to_string(turn));
}

}  // namespace qdt
