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
#include <sstream>

#include "qdt/agent.hpp"
#include "qdt/error.hpp"
#include "qdt/prompt_templates.hpp"

namespace qdt {

using nlohmann::json;

void TaskSpec::validate() const {
  if (task_prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "task prompt is empty");
  if (label_space.size() < 2) throw Error(ErrorCode::kInvalidArgument, "label space needs at least two labels");
  if (std::find(label_space.begin(), label_space.end(), positive_label) == label_space.end()) {
    throw Error(ErrorCode::kInvalidArgument, "positive label '" + positive_label + "' is not in the label space");
  }
  if (answer_markers.size() != label_space.size()) {
    throw Error(ErrorCode::kInvalidArgument, "answer markers must parallel the label space");
  }
  for (std::size_t i = 0; i < answer_markers.size(); ++i) {
    if (answer_markers[i].empty()) throw Error(ErrorCode::kInvalidArgument, "empty answer marker");
    for (std::size_t j = 0; j < answer_markers.size(); ++j) {
      if (i != j && answer_markers[j].find(answer_markers[i]) != std::string::npos) {
        throw Error(ErrorCode::kInvalidArgument,
                    "answer marker '" + answer_markers[i] + "' is a substring of '" + answer_markers[j] + "'");
      }
    }
  }
}

const std::string& TaskSpec::negative_label() const {
  for (const auto& label : label_space) {
    if (label != positive_label) return label;
  }
  throw Error(ErrorCode::kInvalidArgument, "label space has no negative label");
}

int TaskSpec::binary(const std::string& label) const { return label == positive_label ? 1 : 0; }

TaskSpec TaskSpec::from_json(const json& j) {
  TaskSpec task;
  try {
    task.task_prompt = j.at("task_prompt").get<std::string>();
    task.label_space = j.at("label_space").get<std::vector<std::string>>();
    task.positive_label = j.at("positive_label").get<std::string>();
    if (j.contains("answer_markers")) {
      task.answer_markers = j.at("answer_markers").get<std::vector<std::string>>();
    } else {
      for (const auto& label : task.label_space) task.answer_markers.push_back("ANSWER: " + label);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("task spec: ") + e.what());
  }
  task.validate();
  return task;
}

json TaskSpec::to_json() const {
  return {{"task_prompt", task_prompt},
          {"label_space", label_space},
          {"positive_label", positive_label},
          {"answer_markers", answer_markers}};
}

TaskSpec readmission_task(const TableMeta& table) {
  const auto& label = table.label();
  TaskSpec task;
  task.task_prompt =
      "Predict whether the test patient will be readmitted to hospital within 30 days of discharge. "
      "The training cohort is stored in table " + table.name + "; its outcome column " + label.name +
      " is 1 for patients readmitted within 30 days and 0 otherwise. Answer 1 for readmission within 30 days, "
      "0 otherwise.";
  task.label_space = {"0", "1"};
  task.positive_label = "1";
  task.answer_markers = {"ANSWER: 0", "ANSWER: 1"};
  task.validate();
  return task;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size() * 2);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) throw Error(ErrorCode::kInternal, "unterminated placeholder in template");
    out.append(tmpl.substr(pos, open - pos));
    const std::string name(tmpl.substr(open + 2, close - open - 2));
    const auto it = values.find(name);
    if (it == values.end()) throw Error(ErrorCode::kInternal, "no value for template placeholder '" + name + "'");
    out += it->second;
    pos = close + 2;
  }
  return out;
}

namespace {

std::string answer_lines(const TaskSpec& task) {
  std::string lines;
  for (const auto& marker : task.answer_markers) lines += marker + "\n";
  return lines;
}

}  // namespace

ChatMessage build_system_prompt(const SchemaCatalog& catalog, const PolicyConfig& policy, const TaskSpec& task,
                                std::size_t budget) {
  task.validate();
  return {"system", render_template(prompts::k_system_qdt_v1, {{"task_prompt", task.task_prompt},
                                                               {"schema_doc", export_catalog_doc(catalog)},
                                                               {"policy_summary", policy.summary()},
                                                               {"k_min", std::to_string(policy.k_min)},
                                                               {"answer_lines", answer_lines(task)},
                                                               {"budget", std::to_string(budget)}})};
}

ChatMessage build_llm_only_prompt(const TaskSpec& task) {
  task.validate();
  return {"system", render_template(prompts::k_system_llm_only_v1,
                                    {{"task_prompt", task.task_prompt}, {"answer_lines", answer_lines(task)}})};
}

std::string render_test_record(const TestRecord& record) {
  if (record.present_features.empty()) return "(no features available)\n";
  std::ostringstream out;
  for (const auto& [key, value] : record.present_features) out << key << ": " << format_value(value) << '\n';
  return out.str();
}

ChatMessage build_record_message(const TestRecord& record) {
  return {"user", render_template(prompts::k_user_record_v1, {{"record", render_test_record(record)}})};
}

}  // namespace qdt
