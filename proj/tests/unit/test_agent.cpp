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

#include <functional>

#include "qdt/agent.hpp"
#include "qdt/error.hpp"
#include "test_support.hpp"

namespace qdt {
namespace {

using testing::TempDir;

// Replies computed from the history; counts calls.
class FnBackend : public ChatBackend {
 public:
  using Fn = std::function<std::string(const std::vector<ChatMessage>&)>;
  explicit FnBackend(Fn fn) : fn_(std::move(fn)) {}
  ChatMessage complete(const std::vector<ChatMessage>& history) const override {
    ++calls;
    return {"assistant", fn_(history)};
  }
  mutable int calls = 0;

 private:
  Fn fn_;
};

FnBackend sequence(std::vector<std::string> replies) {
  return FnBackend([replies, i = std::make_shared<std::size_t>(0)](const std::vector<ChatMessage>&) {
    const auto& r = replies.at(std::min(*i, replies.size() - 1));
    ++*i;
    return r;
  });
}

std::string sql_block(const std::string& sql) { return "Let me check.\n```sql\n" + sql + "\n```"; }

class AgentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto fixture = testing::write_group_fixture(dir_.path());
    store_ = std::make_shared<DatasetStore>(DatasetStore::create(dir_ / "g.db"));
    store_->ingest_csv(fixture.csv, SchemaConfig::load(fixture.schema));
    audit_ = std::make_shared<AuditLog>(dir_ / "audit.ndjson");
    client_ = std::make_unique<testing::LocalGatewayClient>(
        std::make_shared<QueryGateway>(store_, PolicyConfig{}, audit_));
    task_ = readmission_task(store_->catalog().primary());
    record_.record_id = "r1";
    record_.present_features = {{"grp", std::string("g3")}, {"score", std::int64_t{4}}};
    record_.true_label = 1;
  }

  TempDir dir_;
  std::shared_ptr<DatasetStore> store_;
  std::shared_ptr<AuditLog> audit_;
  std::unique_ptr<testing::LocalGatewayClient> client_;
  TaskSpec task_;
  TestRecord record_;
};

TEST_F(AgentTest, SystemPromptCarriesSchemaPolicyAndBudget) {
  const auto prompt = build_system_prompt(store_->catalog(), PolicyConfig{}, task_, 5);
  EXPECT_EQ(prompt.role, "system");
  EXPECT_NE(prompt.content.find("cohort"), std::string::npos);
  EXPECT_NE(prompt.content.find("outcome"), std::string::npos);
  EXPECT_NE(prompt.content.find("fewer than 2 rows"), std::string::npos);
  EXPECT_NE(prompt.content.find('5'), std::string::npos);
  EXPECT_NE(prompt.content.find("ANSWER: 1"), std::string::npos);
  EXPECT_NE(prompt.content.find("```sql"), std::string::npos);
  EXPECT_EQ(prompt.content.find("{{"), std::string::npos);
  EXPECT_EQ(prompt.content, build_system_prompt(store_->catalog(), PolicyConfig{}, task_, 5).content);
}

TEST_F(AgentTest, LlmOnlyPromptHasNoQueryInstructions) {
  const auto prompt = build_llm_only_prompt(task_);
  EXPECT_EQ(prompt.content.find("```sql"), std::string::npos);
  EXPECT_NE(prompt.content.find("ANSWER: 0"), std::string::npos);
}

TEST_F(AgentTest, RecordRendering) {
  EXPECT_EQ(render_test_record(record_), "grp: g3\nscore: 4\n");
  TestRecord empty;
  EXPECT_EQ(render_test_record(empty), "(no features available)\n");
  const auto msg = build_record_message(record_);
  EXPECT_EQ(msg.role, "user");
  EXPECT_NE(msg.content.find("grp: g3"), std::string::npos);
}

TEST(Template, MissingPlaceholderThrows) {
  EXPECT_EQ(render_template("a {{x}} b", {{"x", "1"}}), "a 1 b");
  EXPECT_THROW(render_template("a {{y}}", {{"x", "1"}}), Error);
}

TEST_F(AgentTest, ParseActionPrefersFirstSqlBlock) {
  const auto a = parse_action("```sql\n SELECT 1 \n```\n```sql\nSELECT 2\n```\nANSWER: 1", task_);
  ASSERT_TRUE(std::holds_alternative<QueryAction>(a));
  EXPECT_EQ(std::get<QueryAction>(a).sql, "SELECT 1");
}

TEST_F(AgentTest, ParseActionReadsLastMarkerLine) {
  auto a = parse_action("Thinking.\nANSWER: 0\nOn reflection:\n**ANSWER: 1**", task_);
  ASSERT_TRUE(std::holds_alternative<FinalAnswer>(a));
  EXPECT_EQ(std::get<FinalAnswer>(a).label, "1");
  EXPECT_TRUE(std::holds_alternative<Malformed>(parse_action("The answer is ANSWER: 1 probably", task_)));
  EXPECT_TRUE(std::holds_alternative<Malformed>(parse_action("", task_)));
  EXPECT_TRUE(std::holds_alternative<Malformed>(parse_action("ANSWER: 2", task_)));
}

TEST(TaskSpecTest, RejectsOverlappingMarkers) {
  TaskSpec t;
  t.task_prompt = "p";
  t.label_space = {"0", "1"};
  t.positive_label = "1";
  t.answer_markers = {"ANSWER: 1", "ANSWER: 10"};
  EXPECT_THROW(t.validate(), Error);
  t.answer_markers = {"ANSWER: 0", "ANSWER: 1"};
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t.negative_label(), "0");
  EXPECT_EQ(t.binary("1"), 1);
  EXPECT_EQ(TaskSpec::from_json(t.to_json()).to_json(), t.to_json());
}

TEST_F(AgentTest, ImmediateAnswerUsesNoQueries) {
  auto backend = sequence({"ANSWER: 1"});
  const auto p = run_episode(record_, task_, *client_, backend);
  EXPECT_EQ(p.label, "1");
  EXPECT_FALSE(p.fallback_used);
  EXPECT_EQ(p.queries_issued, 0u);
  EXPECT_TRUE(audit_->read().empty());
}

TEST_F(AgentTest, RejectionIsFedBackAndRepaired) {
  auto backend = sequence({sql_block("SELECT * FROM cohort"),
                           sql_block("SELECT grp, AVG(outcome) FROM cohort GROUP BY grp"), "Rate is high.\nANSWER: 1"});
  const auto p = run_episode(record_, task_, *client_, backend);
  EXPECT_EQ(p.label, "1");
  EXPECT_EQ(p.queries_issued, 2u);
  EXPECT_EQ(p.queries_approved, 1u);
  ASSERT_EQ(p.gateway_calls.size(), 2u);
  EXPECT_EQ(p.gateway_calls[0].response.status, QueryResponse::Status::kRejected);
  EXPECT_EQ(p.rationale, "Rate is high.\nANSWER: 1");

  std::vector<std::string> gateway_texts;
  for (const auto& m : p.transcript) {
    if (m.origin == MessageOrigin::kGateway) gateway_texts.push_back(m.message.content);
  }
  ASSERT_EQ(gateway_texts.size(), 2u);
  EXPECT_EQ(gateway_texts[0].rfind("QUERY REJECTED:", 0), 0u);
  EXPECT_NE(gateway_texts[0].find("BARE_PROJECTION"), std::string::npos);
  EXPECT_EQ(gateway_texts[1].rfind("QUERY RESULT (3 rows, suppressed_groups: 2)", 0), 0u);

  const auto entries = audit_->read();
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].session_id, "r1");
}

TEST_F(AgentTest, ZeroBudgetForcesAnswer) {
  auto backend = sequence({sql_block("SELECT COUNT(*) FROM cohort"), "ANSWER: 1"});
  const auto p = run_episode(record_, task_, *client_, backend, 0);
  EXPECT_EQ(p.label, "1");
  EXPECT_EQ(p.queries_issued, 0u);
  EXPECT_TRUE(audit_->read().empty());
  bool notice = false;
  for (const auto& m : p.transcript) notice |= m.message.content == kBudgetExhausted;
  EXPECT_TRUE(notice);
}

TEST_F(AgentTest, AlwaysQueryingModelIsCutOffAtBudget) {
  auto backend = FnBackend([](const std::vector<ChatMessage>&) { return sql_block("SELECT COUNT(*) FROM cohort"); });
  const auto p = run_episode(record_, task_, *client_, backend, 3);
  EXPECT_EQ(p.queries_issued, 3u);
  EXPECT_TRUE(p.fallback_used);
  EXPECT_EQ(p.label, task_.negative_label());
  EXPECT_EQ(audit_->read().size(), 3u);
  EXPECT_EQ(backend.calls, 4);
}

TEST_F(AgentTest, MalformedTwiceFallsBack) {
  auto backend = sequence({"hmm", "still thinking"});
  const auto p = run_episode(record_, task_, *client_, backend);
  EXPECT_TRUE(p.fallback_used);
  EXPECT_EQ(p.label, "0");
  EXPECT_EQ(backend.calls, 2);
  bool reprompted = false;
  for (const auto& m : p.transcript) reprompted |= m.message.content == kReprompt;
  EXPECT_TRUE(reprompted);
}

TEST_F(AgentTest, MalformedOnceThenRecovers) {
  auto backend = sequence({"hmm", "ANSWER: 1"});
  const auto p = run_episode(record_, task_, *client_, backend);
  EXPECT_FALSE(p.fallback_used);
  EXPECT_EQ(p.label, "1");
}

TEST_F(AgentTest, ModelNeverSeesRowsFromTheStore) {
  auto backend = sequence({sql_block("SELECT grp, COUNT(*) FROM cohort GROUP BY grp"), "ANSWER: 0"});
  const auto p = run_episode(record_, task_, *client_, backend);
  for (const auto& m : p.transcript) {
    if (m.message.role == "user") {
      EXPECT_NE(m.origin, MessageOrigin::kModel);
    }
    EXPECT_EQ(m.message.content.find("g1 "), std::string::npos);
  }
  EXPECT_EQ(p.transcript.front().message.role, "system");
  EXPECT_EQ(p.transcript.back().origin, MessageOrigin::kModel);
}

TEST_F(AgentTest, EpisodesAreDeterministic) {
  const auto backend = ScriptedBackend(Script::load(testing::data_path("scripts/qdt_episode.json")));
  const QdtAgent agent(task_, *client_, backend);
  const auto a = agent.run(record_);
  const auto b = agent.run(record_);
  EXPECT_EQ(a.transcript_json(), b.transcript_json());
  EXPECT_EQ(a.queries_issued, 3u);
}

TEST_F(AgentTest, BackendFailurePropagates) {
  const ScriptedBackend backend(Script{});
  EXPECT_THROW(run_episode(record_, task_, *client_, backend), Error);
}

TEST_F(AgentTest, LlmOnlyNeverTouchesGateway) {
  auto backend = sequence({"no marker", "ANSWER: 1"});
  const auto p = run_llm_only(record_, task_, backend);
  EXPECT_EQ(p.mode, Mode::kLlmOnly);
  EXPECT_EQ(p.label, "1");
  EXPECT_EQ(p.queries_issued, 0u);
  EXPECT_TRUE(audit_->read().empty());

  auto sql_only = FnBackend([](const std::vector<ChatMessage>&) { return sql_block("SELECT 1"); });
  const auto q = run_llm_only(record_, task_, sql_only);
  EXPECT_TRUE(q.fallback_used);
  EXPECT_EQ(q.label, "0");
  EXPECT_EQ(sql_only.calls, 2);
}

TEST_F(AgentTest, TranscriptFileRoundTrips) {
  auto backend = sequence({"ANSWER: 1"});
  const auto p = run_episode(record_, task_, *client_, backend);
  p.write_transcript(dir_ / "t.json");
  const auto j = nlohmann::json::parse(testing::read_file(dir_ / "t.json"));
  EXPECT_EQ(j, p.transcript_json());
  EXPECT_EQ(j.dump().find("elapsed_ms"), std::string::npos);
}

TEST(QueryResponseRendering, EmptyTruncatedAndFailed) {
  QueryResponse r;
  r.status = QueryResponse::Status::kApproved;
  r.columns = {"a"};
  EXPECT_NE(render_query_response(r).find("(no rows)"), std::string::npos);
  r.rows = {{std::int64_t{1}}};
  r.truncated = true;
  EXPECT_NE(render_query_response(r).find("(result truncated to 1 rows)"), std::string::npos);
  r.execution_error = ExecutionFailure{"timeout", "too slow"};
  EXPECT_EQ(render_query_response(r).rfind("QUERY FAILED: timeout: too slow", 0), 0u);
}

TEST(ModeNames, Parse) {
  EXPECT_EQ(mode_from_string("qdt"), Mode::kQdt);
  EXPECT_EQ(mode_from_string("llm-only"), Mode::kLlmOnly);
  EXPECT_EQ(mode_from_string("llm_only"), Mode::kLlmOnly);
  EXPECT_THROW(mode_from_string("oracle"), Error);
}

}  // namespace
}  // namespace qdt
