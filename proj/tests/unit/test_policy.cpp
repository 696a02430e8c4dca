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
#include "qdt/policy.hpp"
#include "qdt/schema.hpp"
#include "test_support.hpp"

namespace qdt {
namespace {

SchemaCatalog diabetes_catalog() {
  return SchemaConfig::load(testing::source_dir() / "config" / "diabetes_schema.json").catalog();
}

SchemaCatalog tiny_catalog() {
  SchemaCatalog c;
  TableMeta t{"t", {}};
  t.columns.push_back({"id", ValueType::kInteger, ColumnRole::kIdentifier, std::nullopt, false, ""});
  t.columns.push_back({"age", ValueType::kCategorical, ColumnRole::kFeature, std::nullopt, true, ""});
  t.columns.push_back({"x", ValueType::kReal, ColumnRole::kFeature, std::nullopt, true, ""});
  t.columns.push_back({"y", ValueType::kInteger, ColumnRole::kLabel, std::nullopt, false, ""});
  c.tables.push_back(t);
  return c;
}

std::set<std::string> codes(const PolicyDecision& d) {
  std::set<std::string> out;
  for (const auto& v : d.violations) out.insert(std::string(to_string(v.code)));
  return out;
}

class PolicyTest : public ::testing::Test {
 protected:
  SchemaCatalog catalog_ = diabetes_catalog();
  PolicyConfig policy_;
  PolicyEngine engine_{catalog_, policy_, ApprovalAuthority::generate()};
};

TEST_F(PolicyTest, StarIsBareProjection) {
  EXPECT_EQ(codes(engine_.decide("SELECT * FROM patients")), std::set<std::string>{"BARE_PROJECTION"});
}

TEST_F(PolicyTest, GroupingByIdentifierIsRejected) {
  const auto d = engine_.decide("SELECT patient_nbr, AVG(num_medications) FROM patients GROUP BY patient_nbr");
  EXPECT_FALSE(d.is_approved());
  EXPECT_EQ(codes(d), std::set<std::string>{"IDENTIFIER_GROUPING"});
}

TEST_F(PolicyTest, GroupKeysAndAggregatesPass) {
  const auto d = engine_.decide("SELECT age, AVG(time_in_hospital) FROM patients GROUP BY age");
  EXPECT_TRUE(d.is_approved());
  EXPECT_TRUE(d.violations.empty());
}

TEST_F(PolicyTest, MinMaxNeedsOptIn) {
  EXPECT_EQ(codes(engine_.decide("SELECT MAX(num_lab_procedures) FROM patients")),
            std::set<std::string>{"FORBIDDEN_AGGREGATE"});
  PolicyConfig relaxed;
  relaxed.allow_min_max = true;
  const PolicyEngine engine(catalog_, relaxed, ApprovalAuthority::generate());
  EXPECT_TRUE(engine.decide("SELECT MAX(num_lab_procedures) FROM patients").is_approved());
}

TEST_F(PolicyTest, ScalarAggregateIsApprovedWithThresholdWrap) {
  const auto d = engine_.decide("SELECT AVG(time_in_hospital) FROM patients WHERE number_inpatient > 2");
  ASSERT_TRUE(d.is_approved());
  EXPECT_NE(d.rewritten_sql().find("_qdt_n >= 2"), std::string::npos);
  EXPECT_NE(d.rewritten_sql().find("WHERE number_inpatient > 2"), std::string::npos);
}

TEST_F(PolicyTest, LimitDoesNotRescueRawRows) {
  EXPECT_EQ(codes(engine_.decide("SELECT race FROM patients LIMIT 5")), std::set<std::string>{"BARE_PROJECTION"});
}

TEST_F(PolicyTest, IdentifierAllowedOnlyInsideCountDistinct) {
  EXPECT_TRUE(engine_.decide("SELECT COUNT(DISTINCT patient_nbr) FROM patients WHERE insulin = 'Up'").is_approved());
  EXPECT_EQ(codes(engine_.decide("SELECT SUM(patient_nbr) FROM patients")),
            std::set<std::string>{"IDENTIFIER_EXPOSURE"});
}

TEST_F(PolicyTest, ParseFailuresMapToCodes) {
  EXPECT_EQ(codes(engine_.decide("DROP TABLE patients")), std::set<std::string>{"FORBIDDEN_STATEMENT"});
  EXPECT_EQ(codes(engine_.decide("SELECT 1; SELECT 2")), std::set<std::string>{"MULTI_STATEMENT"});
  EXPECT_EQ(codes(engine_.decide("SELECT FROM WHERE")), std::set<std::string>{"PARSE_ERROR"});
}

TEST_F(PolicyTest, DeniedColumnsBehaveLikeIdentifiers) {
  PolicyConfig strict;
  strict.denied_columns = {"payer_code"};
  const PolicyEngine engine(catalog_, strict, ApprovalAuthority::generate());
  EXPECT_EQ(codes(engine.decide("SELECT payer_code, COUNT(*) FROM patients GROUP BY payer_code")),
            std::set<std::string>{"IDENTIFIER_GROUPING"});
}

TEST_F(PolicyTest, ViolationLocationPointsAtOffendingToken) {
  const auto d = engine_.decide("SELECT age,\n  time_in_hospital FROM patients");
  ASSERT_FALSE(d.violations.empty());
  const auto it = std::find_if(d.violations.begin(), d.violations.end(),
                               [](const Violation& v) { return v.location.line == 2; });
  ASSERT_NE(it, d.violations.end());
  EXPECT_EQ(it->location.column, 3u);
}

TEST_F(PolicyTest, QueryLengthLimit) {
  PolicyConfig short_limit;
  short_limit.max_query_length = 20;
  const PolicyEngine engine(catalog_, short_limit, ApprovalAuthority::generate());
  EXPECT_EQ(codes(engine.decide("SELECT COUNT(*) FROM patients")), std::set<std::string>{"QUERY_TOO_LONG"});
}

TEST_F(PolicyTest, RejectedDecisionHasNoApproval) {
  const auto d = engine_.decide("SELECT * FROM patients");
  EXPECT_FALSE(d.approved.has_value());
  EXPECT_FALSE(d.suppression_probe.has_value());
  EXPECT_EQ(d.rewritten_sql(), "");
}

TEST(Rewrite, AddsHavingThreshold) {
  const auto catalog = tiny_catalog();
  const auto d = decide("SELECT age, AVG(x) FROM t GROUP BY age", catalog, PolicyConfig{});
  ASSERT_TRUE(d.is_approved());
  EXPECT_EQ(d.rewritten_sql(), "SELECT age, AVG(x) FROM t GROUP BY age HAVING COUNT(*) >= 2");
}

TEST(Rewrite, MergesExistingHaving) {
  const auto catalog = tiny_catalog();
  const auto d = decide("SELECT age, AVG(x) FROM t GROUP BY age HAVING AVG(x) > 3", catalog, PolicyConfig{});
  ASSERT_TRUE(d.is_approved());
  EXPECT_EQ(d.rewritten_sql(), "SELECT age, AVG(x) FROM t GROUP BY age HAVING AVG(x) > 3 AND COUNT(*) >= 2");
}

TEST(Rewrite, ParenthesizesDisjunctiveHaving) {
  const auto catalog = tiny_catalog();
  const auto d = decide("SELECT age, AVG(x) FROM t GROUP BY age HAVING AVG(x) > 3 OR COUNT(*) > 9", catalog,
                        PolicyConfig{});
  ASSERT_TRUE(d.is_approved());
  EXPECT_EQ(d.rewritten_sql(),
            "SELECT age, AVG(x) FROM t GROUP BY age HAVING (AVG(x) > 3 OR COUNT(*) > 9) AND COUNT(*) >= 2");
}

TEST(Rewrite, UsesConfiguredThreshold) {
  const auto catalog = tiny_catalog();
  PolicyConfig policy;
  policy.k_min = 11;
  const auto d = decide("SELECT age, COUNT(*) FROM t GROUP BY age", catalog, policy);
  EXPECT_NE(d.rewritten_sql().find("COUNT(*) >= 11"), std::string::npos);
}

TEST(Rewrite, ProbeCountsSuppressedGroups) {
  const auto catalog = tiny_catalog();
  const auto d = decide("SELECT age, COUNT(*) FROM t GROUP BY age", catalog, PolicyConfig{});
  ASSERT_TRUE(d.suppression_probe.has_value());
  EXPECT_EQ(d.suppression_probe->sql(),
            "SELECT COUNT(*) AS suppressed FROM (SELECT age, COUNT(*) FROM t GROUP BY age HAVING COUNT(*) < 2) AS _qdt_probe");
}

TEST(Approval, TokensBindExactText) {
  const auto authority = ApprovalAuthority::generate();
  const auto token = authority->sign("SELECT 1");
  EXPECT_TRUE(authority->verify("SELECT 1", token));
  EXPECT_FALSE(authority->verify("SELECT 1 ", token));
  EXPECT_FALSE(ApprovalAuthority::generate()->verify("SELECT 1", token));
  EXPECT_FALSE(authority->verify("SELECT 1", "00"));
}

TEST(PolicyConfigTest, RejectsThresholdBelowTwo) {
  PolicyConfig p;
  p.k_min = 1;
  EXPECT_THROW(p.validate(), Error);
  EXPECT_THROW(PolicyConfig::from_json({{"k_min", 0}}), Error);
}

TEST(PolicyConfigTest, JsonRoundTrip) {
  PolicyConfig p;
  p.k_min = 5;
  p.allow_min_max = true;
  p.denied_columns = {"payer_code"};
  p.allowed_aggregates = {Aggregate::kCount, Aggregate::kAvg};
  const auto back = PolicyConfig::from_json(p.to_json());
  EXPECT_EQ(back.to_json(), p.to_json());
}

TEST(PolicyConfigTest, SummaryNamesThresholdAndAggregates) {
  PolicyConfig p;
  const auto text = p.summary();
  EXPECT_NE(text.find("fewer than 2 rows"), std::string::npos);
  EXPECT_NE(text.find("AVG"), std::string::npos);
  EXPECT_EQ(text.find("MIN"), std::string::npos);
}

TEST(ViolationCodes, NamesRoundTrip) {
  for (auto code : all_violation_codes()) {
    EXPECT_EQ(violation_code_from_string(to_string(code)), code);
  }
  EXPECT_FALSE(violation_code_from_string("NOT_A_CODE").has_value());
}

TEST(Locate, CountsLinesAndColumnsFromOne) {
  const auto loc = locate("ab\ncd", 4);
  EXPECT_EQ(loc.line, 2u);
  EXPECT_EQ(loc.column, 2u);
}

}  // namespace
}  // namespace qdt
