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

#include <iterator>

#include "qdt/sql/lexer.hpp"
#include "qdt/sql/parser.hpp"
#include "qdt/sql/printer.hpp"

namespace qdt::sql {
namespace {

TEST(Lexer, DropsCommentsAndDecodesQuotedNames) {
  const auto result = tokenize("SELECT \"my col\", 'it''s' -- trailing\n/* block */ FROM t");
  ASSERT_FALSE(result.error);
  std::vector<TokenKind> kinds;
  for (const auto& t : result.tokens) kinds.push_back(t.kind);
  EXPECT_EQ(kinds, (std::vector<TokenKind>{TokenKind::kIdentifier, TokenKind::kQuotedIdentifier, TokenKind::kComma,
                                            TokenKind::kString, TokenKind::kIdentifier, TokenKind::kIdentifier,
                                            TokenKind::kEnd}));
  EXPECT_EQ(result.tokens[1].value, "my col");
  EXPECT_EQ(result.tokens[3].value, "it's");
}

TEST(Lexer, ReportsUnterminatedString) {
  const auto result = tokenize("SELECT 'open");
  ASSERT_TRUE(result.error);
  EXPECT_EQ(result.error->offset, 7u);
}

TEST(Lexer, NegativeNumbersAreOperatorThenLiteral) {
  const auto result = tokenize("a-1");
  ASSERT_FALSE(result.error);
  ASSERT_EQ(result.tokens.size(), 4u);
  EXPECT_EQ(result.tokens[1].kind, TokenKind::kOperator);
  EXPECT_EQ(result.tokens[2].kind, TokenKind::kInteger);
}

TEST(SplitStatements, IgnoresSemicolonsInsideLiteralsAndComments) {
  const auto parts = split_statements("SELECT ';' FROM t; -- x;\n SELECT 2 /* ; */;\n;  \n");
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_NE(parts[0].find("';'"), std::string::npos);
  EXPECT_NE(parts[1].find("SELECT 2"), std::string::npos);
}

TEST(SplitStatements, EmptyInput) {
  EXPECT_TRUE(split_statements("").empty());
  EXPECT_TRUE(split_statements("  -- only a comment\n").empty());
}

TEST(Parser, CountStarHasOneAggregateItem) {
  const auto result = parse_select("SELECT COUNT(*) FROM patients");
  ASSERT_TRUE(result.statement) << result.errors.at(0).message;
  const auto& core = result.statement->core;
  ASSERT_EQ(core.items.size(), 1u);
  const auto* call = core.items[0].expr->as<FunctionCall>();
  ASSERT_NE(call, nullptr);
  EXPECT_TRUE(call->star);
}

TEST(Parser, ClassifiesNonSelectAndMultiStatement) {
  auto drop = parse_select("DROP TABLE patients");
  ASSERT_FALSE(drop.statement);
  EXPECT_EQ(drop.errors.at(0).kind, ParseErrorKind::kForbiddenStatement);

  auto multi = parse_select("SELECT 1; SELECT 2");
  ASSERT_FALSE(multi.statement);
  EXPECT_EQ(multi.errors.at(0).kind, ParseErrorKind::kMultiStatement);

  auto trailing = parse_select("SELECT 1;");
  EXPECT_TRUE(trailing.statement);
}

TEST(Parser, SyntaxErrorCarriesOffset) {
  const auto result = parse_select("SELECT age FROM patients WHERE");
  ASSERT_FALSE(result.statement);
  EXPECT_EQ(result.errors.at(0).kind, ParseErrorKind::kSyntax);
  EXPECT_GE(result.errors.at(0).offset, 25u);
}

constexpr const char* kRoundTripQueries[] = {
    "SELECT age, AVG(time_in_hospital) AS los FROM patients WHERE race = 'Asian' GROUP BY age",
    "select count(distinct patient_nbr) from main.patients p where p.age in ('[0-10)', '[10-20)')",
    "SELECT CASE WHEN a > 1 THEN 'x' ELSE NULL END AS c, COUNT(*) FROM t GROUP BY 1 ORDER BY 2 DESC",
    "SELECT x FROM t WHERE y BETWEEN 1 AND 2 AND NOT z IS NULL LIMIT 5 OFFSET 2",
    "SELECT a FROM t WHERE EXISTS (SELECT 1 FROM u) UNION ALL SELECT b FROM v",
    "WITH c AS (SELECT 1 AS one) SELECT one FROM c",
    "SELECT CAST(a AS REAL), -b, a || 'x', a COLLATE NOCASE FROM t",
    "SELECT COUNT(*) OVER (PARTITION BY a ORDER BY b) FROM t",
};

class RoundTrip : public ::testing::TestWithParam<std::size_t> {};

TEST_P(RoundTrip, PrintingIsAFixedPoint) {
  const char* text = kRoundTripQueries[GetParam()];
  const auto first = parse_select(text);
  ASSERT_TRUE(first.statement) << first.errors.at(0).message;
  const std::string printed = to_sql(*first.statement);
  const auto second = parse_select(printed);
  ASSERT_TRUE(second.statement) << printed;
  EXPECT_EQ(to_sql(*second.statement), printed);
}

INSTANTIATE_TEST_SUITE_P(Queries, RoundTrip, ::testing::Range<std::size_t>(0, std::size(kRoundTripQueries)));

TEST(Printer, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(quote_identifier("age"), "age");
  EXPECT_EQ(quote_identifier("my col"), "\"my col\"");
  EXPECT_EQ(quote_identifier("select"), "\"select\"");
  EXPECT_EQ(quote_string("it's"), "'it''s'");
}

}  // namespace
}  // namespace qdt::sql
