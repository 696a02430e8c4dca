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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "qdt/error.hpp"
#include "qdt/eval.hpp"
#include "test_support.hpp"

namespace qdt {
namespace {

using testing::TempDir;

TEST(Metrics, WorkedExample) {
  const std::vector<Outcome> outcomes = {{1, 1}, {1, 1}, {1, 0}, {0, 1}, {0, 0}, {0, 0}};
  const auto cm = tally(outcomes);
  EXPECT_EQ(cm.tp, 2u);
  EXPECT_EQ(cm.fp, 1u);
  EXPECT_EQ(cm.fn, 1u);
  EXPECT_EQ(cm.tn, 2u);
  const auto m = metrics_from(cm);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3.0);
}

TEST(Metrics, NoPositivePredictionsGiveZero) {
  const auto m = compute_metrics({{0, 1}, {0, 0}});
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
}

TEST(Metrics, PerfectPrediction) {
  const auto m = compute_metrics({{1, 1}, {0, 0}});
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
}

TEST(Metrics, RejectsEmptyAndNonBinary) {
  EXPECT_THROW(tally({}), Error);
  EXPECT_THROW(tally({{2, 1}}), Error);
}

TestRecord record_with(std::size_t n, const std::string& id) {
  TestRecord r;
  r.record_id = id;
  for (std::size_t i = 0; i < n; ++i) r.present_features["f" + std::to_string(i)] = static_cast<std::int64_t>(i);
  return r;
}

TEST(Masking, CountsFloorTheFraction) {
  EXPECT_EQ(mask_count(10, 0.3), 3u);
  EXPECT_EQ(mask_count(10, 0.7), 7u);
  EXPECT_EQ(mask_count(7, 0.3), 2u);
  EXPECT_EQ(mask_count(3, 0.0), 0u);
  EXPECT_EQ(mask_count(3, 1.0), 3u);
  EXPECT_EQ(mask_count(0, 0.5), 0u);
}

TEST(Masking, RemovesSubsetReproducibly) {
  const auto r = record_with(10, "abc");
  const AblationConfig cfg{0.3, 11};
  const auto a = mask_features(r, cfg);
  const auto b = mask_features(r, cfg);
  EXPECT_EQ(a.present_features.size(), 7u);
  EXPECT_EQ(test_record_to_json(a), test_record_to_json(b));
  for (const auto& [k, v] : a.present_features) EXPECT_EQ(r.present_features.at(k), v);
}

TEST(Masking, DependsOnSeedAndRecord) {
  const auto r = record_with(20, "abc");
  std::set<std::string> variants;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    variants.insert(test_record_to_json(mask_features(r, {0.5, seed})).dump());
  }
  EXPECT_GT(variants.size(), 1u);
  const auto other = record_with(20, "xyz");
  EXPECT_NE(test_record_to_json(mask_features(r, {0.5, 1})).at("features"),
            test_record_to_json(mask_features(other, {0.5, 1})).at("features"));
}

TEST(Masking, ZeroFractionIsIdentity) {
  const auto r = record_with(5, "id");
  EXPECT_EQ(test_record_to_json(mask_features(r, {0.0, 9})), test_record_to_json(r));
  EXPECT_THROW(mask_features(r, {1.5, 0}), Error);
}

// Answers by record parity and throws for ids listed in `failing`.
class ParityBackend : public ChatBackend {
 public:
  explicit ParityBackend(std::set<std::string> failing = {}) : failing_(std::move(failing)) {}
  ChatMessage complete(const std::vector<ChatMessage>& history) const override {
    for (const auto& id : failing_) {
      if (history.at(1).content.find("k: " + id + "\n") != std::string::npos) {
        throw Error(ErrorCode::kTransport, "boom");
      }
    }
    const bool odd = history.at(1).content.find("odd: 1") != std::string::npos;
    return {"assistant", odd ? "ANSWER: 1" : "ANSWER: 0"};
  }

 private:
  std::set<std::string> failing_;
};

std::vector<TestRecord> parity_records(std::size_t n) {
  std::vector<TestRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    TestRecord r;
    r.record_id = "rec" + std::to_string(i);
    r.present_features = {{"k", std::string("rec" + std::to_string(i))}, {"odd", static_cast<std::int64_t>(i % 2)}};
    r.true_label = (i % 3 == 0) ? 1 : 0;
    out.push_back(r);
  }
  return out;
}

TaskSpec binary_task() {
  TaskSpec t;
  t.task_prompt = "Predict.";
  t.label_space = {"0", "1"};
  t.positive_label = "1";
  t.answer_markers = {"ANSWER: 0", "ANSWER: 1"};
  return t;
}

TEST(Batch, TalliesEveryRecord) {
  const auto records = parity_records(10);
  BatchConfig cfg;
  cfg.mode = Mode::kLlmOnly;
  const auto report = run_batch(records, binary_task(), cfg, ParityBackend(), nullptr);
  ASSERT_EQ(report.records.size(), 10u);
  EXPECT_FALSE(report.aborted);
  EXPECT_EQ(report.errors, 0u);
  ASSERT_TRUE(report.confusion.has_value());
  EXPECT_EQ(report.confusion->total(), 10u);

  std::vector<Outcome> expected;
  for (std::size_t i = 0; i < 10; ++i) expected.push_back({static_cast<int>(i % 2), i % 3 == 0 ? 1 : 0});
  EXPECT_EQ(report.metrics->to_json(), compute_metrics(expected).to_json());
  EXPECT_EQ(report.class_counts.true_positive, 4u);
  EXPECT_EQ(report.class_counts.predicted_positive, 5u);
}

TEST(Batch, ParallelismDoesNotChangeResults) {
  const auto records = parity_records(40);
  BatchConfig serial;
  serial.mode = Mode::kLlmOnly;
  BatchConfig parallel = serial;
  parallel.parallelism = 6;
  const ParityBackend backend;
  const auto a = run_batch(records, binary_task(), serial, backend, nullptr);
  const auto b = run_batch(records, binary_task(), parallel, backend, nullptr);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].record_id, b.records[i].record_id);
    EXPECT_EQ(a.records[i].predicted, b.records[i].predicted);
  }
  EXPECT_EQ(a.metrics->to_json(), b.metrics->to_json());
}

TEST(Batch, ErroredRecordsAreExcludedFromMetrics) {
  const auto records = parity_records(10);
  BatchConfig cfg;
  cfg.mode = Mode::kLlmOnly;
  const auto report = run_batch(records, binary_task(), cfg, ParityBackend({"rec3"}), nullptr);
  EXPECT_FALSE(report.aborted);
  EXPECT_EQ(report.errors, 1u);
  ASSERT_EQ(report.records.size(), 10u);
  EXPECT_FALSE(report.records[3].predicted.has_value());
  EXPECT_NE(report.records[3].error.find("boom"), std::string::npos);
  EXPECT_EQ(report.confusion->total(), 9u);
}

TEST(Batch, TooManyErrorsAbort) {
  const auto records = parity_records(8);
  BatchConfig cfg;
  cfg.mode = Mode::kLlmOnly;
  const auto report =
      run_batch(records, binary_task(), cfg, ParityBackend({"rec0", "rec1", "rec2", "rec3"}), nullptr);
  EXPECT_TRUE(report.aborted);
  EXPECT_FALSE(report.abort_reason.empty());
  EXPECT_EQ(report.records_requested, 8u);
}

TEST(Batch, QdtModeNeedsGateway) {
  BatchConfig cfg;
  EXPECT_THROW(run_batch(parity_records(2), binary_task(), cfg, ParityBackend(), nullptr), Error);
}

TEST(Batch, WritesTranscripts) {
  TempDir dir;
  BatchConfig cfg;
  cfg.mode = Mode::kLlmOnly;
  cfg.transcript_dir = dir / "t";
  run_batch(parity_records(3), binary_task(), cfg, ParityBackend(), nullptr);
  EXPECT_TRUE(std::filesystem::exists(dir / "t" / "rec0.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "t" / "rec2.json"));
}

TEST(Report, EmitsCsvSummaryAndComparison) {
  TempDir dir;
  BatchConfig cfg;
  cfg.mode = Mode::kLlmOnly;
  const auto report = run_batch(parity_records(5), binary_task(), cfg, ParityBackend({"rec4"}), nullptr);
  emit_report(report, dir.path());

  const auto csv = testing::read_file(dir / "records.csv");
  EXPECT_EQ(csv.rfind("record_id,predicted,true_label,fallback_used,queries_issued,queries_approved,error\n", 0),
            0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);

  const auto summary = nlohmann::json::parse(testing::read_file(dir / "summary.json"));
  EXPECT_EQ(summary.at("errors"), 1);
  EXPECT_TRUE(summary.contains("metrics"));

  const auto comparison = testing::read_file(dir / "comparison.txt");
  for (const auto& ref : reference_results()) EXPECT_NE(comparison.find(ref.method), std::string::npos);
}

TEST(Report, ReferenceRowsAreTheBaselines) {
  const auto& refs = reference_results();
  ASSERT_EQ(refs.size(), 6u);
  EXPECT_EQ(refs[0].method, "TabPFN");
  EXPECT_DOUBLE_EQ(refs[0].f1, 0.69);
  EXPECT_DOUBLE_EQ(refs[3].precision, 0.68);
  EXPECT_DOUBLE_EQ(refs[3].recall, 0.73);
  EXPECT_DOUBLE_EQ(refs[3].f1, 0.70);
  EXPECT_DOUBLE_EQ(refs[5].f1, 0.64);
}

}  // namespace
}  // namespace qdt
