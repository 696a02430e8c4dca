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

#ifndef QDT_POLICY_HPP_
#define QDT_POLICY_HPP_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qdt/approval.hpp"
#include "qdt/schema.hpp"
#include "qdt/sql/ast.hpp"

namespace qdt {

// The policy engine turns candidate SQL into an approve/reject verdict.
//
// A query is approved only when every value it can emit is either an
// aggregate over the matching rows or a GROUP BY key describing a cohort,
// and the approved text is rewritten so that every aggregating SELECT (at
// any nesting depth) emits nothing for cohorts smaller than k_min:
//
//   grouped:  ... GROUP BY g HAVING <original> AND COUNT(*) >= k
//   scalar:   SELECT _qdt_gate._qdt_c0 AS "<name>"
//             FROM (SELECT <agg> AS _qdt_c0, COUNT(*) AS _qdt_n ...) AS _qdt_gate
//             WHERE _qdt_gate._qdt_n >= k
//
// Sub-threshold cohorts are suppressed, never reported as errors.

/// Stable violation codes. The string forms are part of the wire format.
enum class ViolationCode {
  kBareProjection,
  kIdentifierGrouping,
  kIdentifierExposure,
  kForbiddenAggregate,
  kForbiddenFunction,
  kWindowFunction,
  kForbiddenStatement,
  kMultiStatement,
  kDistinctProjection,
  kSubqueryViolation,
  kSetOperation,
  kCteForbidden,
  kJoinForbidden,
  kUnknownTable,
  kOrderByRaw,
  kParseError,
  kQueryTooLong,
};

std::string_view to_string(ViolationCode code);
std::optional<ViolationCode> violation_code_from_string(std::string_view s);
const std::vector<ViolationCode>& all_violation_codes();

struct SourceLocation {
  std::size_t offset = 0;  // byte offset into the submitted text
  std::size_t line = 1;
  std::size_t column = 1;
};

struct Violation {
  ViolationCode code;
  std::string message;
  SourceLocation location;
};

nlohmann::json violation_to_json(const Violation& v);
Violation violation_from_json(const nlohmann::json& j);

enum class Aggregate { kCount, kCountDistinct, kAvg, kSum, kStddev, kVariance };

std::string_view to_string(Aggregate a);

struct PolicyConfig {
  static constexpr int kMinimumK = 2;

  int k_min = kMinimumK;
  std::set<Aggregate> allowed_aggregates = {Aggregate::kCount, Aggregate::kCountDistinct,
                                            Aggregate::kAvg,   Aggregate::kSum,
                                            Aggregate::kStddev, Aggregate::kVariance};
  bool allow_min_max = false;
  // Extra denied columns; identifier-role catalog columns are always denied.
  std::set<std::string> denied_columns;
  std::size_t max_rows = 100;
  std::size_t max_query_length = 4000;

  /// Throws kInvalidArgument if k_min < 2 or a limit is zero.
  void validate() const;

  static PolicyConfig from_json(const nlohmann::json& j);
  static PolicyConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Human-readable rules, shared by the schema document and system prompt.
  std::string summary() const;
};

enum class Verdict { kApproved, kRejected };

std::string_view to_string(Verdict v);

struct PolicyDecision {
  Verdict verdict = Verdict::kRejected;
  std::vector<Violation> violations;
  std::optional<ApprovedQuery> approved;  // rewritten SQL + token; set iff approved
  // Counts the top-level cohorts the threshold removed; absent when the
  // top-level SELECT does not aggregate.
  std::optional<ApprovedQuery> suppression_probe;

  bool is_approved() const { return verdict == Verdict::kApproved; }
  std::string rewritten_sql() const { return approved ? approved->sql() : std::string(); }
};

/// Result of parsing one candidate query.
struct ParsedQuery {
  std::optional<sql::SelectStatement> ast;
  std::vector<Violation> violations;  // PARSE_ERROR, FORBIDDEN_STATEMENT, MULTI_STATEMENT
};

ParsedQuery parse_sql(std::string_view text);

/// Every policy violation in `ast`. `text` is the source `ast` was parsed
/// from and is used for locations.
std::vector<Violation> validate(const sql::SelectStatement& ast, std::string_view text,
                                const SchemaCatalog& catalog, const PolicyConfig& policy);

/// Threshold rewrite of a validated query, plus (when the top-level SELECT
/// aggregates) a probe counting the top-level cohorts the threshold removes.
struct ThresholdRewrite {
  sql::SelectStatement statement;
  std::optional<sql::SelectStatement> probe;
};

/// `text` is the source of `ast` and supplies output column names.
ThresholdRewrite rewrite_threshold(const sql::SelectStatement& ast, std::string_view text, int k);

SourceLocation locate(std::string_view text, std::size_t offset);

/// parse -> validate -> rewrite. Pure given (text, catalog, policy) and the
/// authority key; safe for concurrent use.
class PolicyEngine {
 public:
  PolicyEngine(SchemaCatalog catalog, PolicyConfig policy,
               std::shared_ptr<const ApprovalAuthority> authority);

  PolicyDecision decide(std::string_view text) const;

  const SchemaCatalog& catalog() const { return catalog_; }
  const PolicyConfig& policy() const { return policy_; }
  const std::shared_ptr<const ApprovalAuthority>& authority() const { return authority_; }

 private:
  SchemaCatalog catalog_;
  PolicyConfig policy_;
  std::shared_ptr<const ApprovalAuthority> authority_;
};

/// Convenience form with a throwaway authority; tokens from it verify only
/// against that authority.
PolicyDecision decide(std::string_view text, const SchemaCatalog& catalog,
                      const PolicyConfig& policy);

}  // namespace qdt

#endif  // QDT_POLICY_HPP_
