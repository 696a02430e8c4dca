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
#include <atomic>
#include <cctype>
#include <chrono>
#include <mutex>
#include <thread>

#include "qdt/error.hpp"
#include "qdt/eval.hpp"

namespace qdt {

using nlohmann::json;

void BatchConfig::validate() const {
  if (parallelism == 0) throw Error(ErrorCode::kInvalidArgument, "parallelism must be >= 1");
  if (!(max_error_fraction >= 0.0 && max_error_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "max error fraction must lie in [0, 1]");
  }
  ablation.validate();
}

json BatchConfig::to_json() const {
  return {{"mode", to_string(mode)},
          {"parallelism", parallelism},
          {"budget", budget},
          {"ablation", ablation.to_json()},
          {"max_error_fraction", max_error_fraction}};
}

namespace {

std::string transcript_file_name(const std::string& record_id) {
  std::string name;
  for (char c : record_id) name += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return (name.empty() ? std::string("record") : name) + ".json";
}

}  // namespace

RunReport run_batch(const std::vector<TestRecord>& records, const TaskSpec& task, const BatchConfig& config,
                    const ChatBackend& backend, GatewayClient* gateway) {
  config.validate();
  task.validate();
  if (config.mode == Mode::kQdt && !gateway) throw Error(ErrorCode::kInvalidArgument, "qdt mode needs a gateway");
  if (config.transcript_dir) std::filesystem::create_directories(*config.transcript_dir);

  const auto started = std::chrono::steady_clock::now();
  std::optional<QdtAgent> agent;
  if (config.mode == Mode::kQdt) agent.emplace(task, *gateway, backend, config.budget);

  const std::size_t n = records.size();
  const auto error_limit = static_cast<std::size_t>(config.max_error_fraction * static_cast<double>(n));
  std::vector<std::optional<RecordOutcome>> slots(n);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> errors{0};
  std::atomic<bool> stop{false};
  std::mutex abort_mutex;
  std::string abort_reason;

  auto evaluate = [&](std::size_t i) {
    const TestRecord record = mask_features(records[i], config.ablation);
    RecordOutcome outcome;
    outcome.record_id = record.record_id;
    outcome.true_label = record.true_label;
    try {
      Prediction p = agent ? agent->run(record) : run_llm_only(record, task, backend);
      outcome.predicted = task.binary(p.label);
      outcome.fallback_used = p.fallback_used;
      outcome.queries_issued = p.queries_issued;
      outcome.queries_approved = p.queries_approved;
      if (config.transcript_dir) p.write_transcript(*config.transcript_dir / transcript_file_name(record.record_id));
    } catch (const std::exception& e) {
      outcome.error = e.what();
      if (errors.fetch_add(1) + 1 > error_limit) {
        std::lock_guard lock(abort_mutex);
        if (!stop.exchange(true)) {
          abort_reason = "episode errors exceeded " + std::to_string(error_limit) + " of " + std::to_string(n) +
                         " records; last error: " + e.what();
        }
      }
    }
    slots[i] = std::move(outcome);
  };

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      evaluate(i);
    }
  };

  const std::size_t threads = std::min(config.parallelism, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  RunReport report;
  report.records_requested = n;
  for (auto& slot : slots) {
    if (slot) report.records.push_back(std::move(*slot));
  }
  report.aborted = stop.load();
  report.abort_reason = abort_reason;
  report.config = config.to_json();
  report.config["task"] = task.to_json();
  report.recompute();
  report.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace qdt
