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

#ifndef QDT_EVAL_HPP_
#define QDT_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdt/agent.hpp"
#include "qdt/gateway.hpp"
#include "qdt/llm.hpp"
#include "qdt/store.hpp"

namespace qdt {

struct Outcome {
  int predicted = 0;  // 0 or 1
  int truth = 0;
};

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  nlohmann::json to_json() const;
};

struct Metrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  nlohmann::json to_json() const;
};

/// Throws kInvalidArgument on an empty list or a non-binary label.
ConfusionMatrix tally(const std::vector<Outcome>& outcomes);
/// Any 0/0 ratio is 0.
Metrics metrics_from(const ConfusionMatrix& cm);
Metrics compute_metrics(const std::vector<Outcome>& outcomes);

struct AblationConfig {
  double mask_fraction = 0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

/// floor(fraction * present), with a small tolerance for binary rounding.
std::size_t mask_count(std::size_t present, double fraction);

/// Removes mask_count() present features chosen uniformly without
/// replacement, seeded by (seed, record_id). Pure.
TestRecord mask_features(const TestRecord& record, const AblationConfig& cfg);

struct RecordOutcome {
  std::string record_id;
  std::optional<int> predicted;  // unset on error
  std::optional<int> true_label;
  bool fallback_used = false;
  std::size_t queries_issued = 0;
  std::size_t queries_approved = 0;
  std::string error;
};

struct BatchConfig {
  Mode mode = Mode::kQdt;
  std::size_t parallelism = 1;
  std::size_t budget = kDefaultQueryBudget;
  AblationConfig ablation;
  double max_error_fraction = 0.25;  // abort once errors exceed this share of records
  std::optional<std::filesystem::path> transcript_dir;

  void validate() const;
  nlohmann::json to_json() const;
};

struct ClassCounts {
  std::size_t true_positive = 0;  // records whose true label is positive
  std::size_t true_negative = 0;
  std::size_t predicted_positive = 0;
  std::size_t predicted_negative = 0;
};

struct RunReport {
  std::vector<RecordOutcome> records;  // input order; records never dispatched are absent when aborted
  std::size_t records_requested = 0;
  std::size_t errors = 0;
  bool aborted = false;
  std::string abort_reason;
  std::optional<ConfusionMatrix> confusion;
  std::optional<Metrics> metrics;
  ClassCounts class_counts;
  std::size_t fallbacks = 0;
  nlohmann::json config = nlohmann::json::object();
  double wall_clock_ms = 0;

  /// Recomputes confusion, metrics and counts from `records`.
  void recompute();
  nlohmann::json summary_json() const;
};

/// `gateway` is required in qdt mode and ignored otherwise. Per-record
/// failures are recorded, never dropped.
RunReport run_batch(const std::vector<TestRecord>& records, const TaskSpec& task, const BatchConfig& config,
                    const ChatBackend& backend, GatewayClient* gateway);

struct ReferenceResult {
  std::string method;
  double precision;
  double recall;
  double f1;
};

/// Published comparison rows, shown next to a run and never used in
/// computation.
const std::vector<ReferenceResult>& reference_results();

/// Fixed-width comparison of this run against the reference rows.
std::string render_comparison(const RunReport& report);

/// Writes summary.json, records.csv and comparison.txt into `dir`.
void emit_report(const RunReport& report, const std::filesystem::path& dir);

}  // namespace qdt

#endif  // QDT_EVAL_HPP_
