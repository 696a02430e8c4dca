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

#include "qdt/error.hpp"
#include "qdt/policy.hpp"
#include "qdt/sql/parser.hpp"
#include "qdt/sql/printer.hpp"

namespace qdt {

SourceLocation locate(std::string_view text, std::size_t offset) {
  SourceLocation loc;
  loc.offset = std::min(offset, text.size());
  for (std::size_t i = 0; i < loc.offset; ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

ParsedQuery parse_sql(std::string_view text) {
  ParsedQuery out;
  auto result = sql::parse_select(text);
  for (const auto& e : result.errors) {
    ViolationCode code = ViolationCode::kParseError;
    if (e.kind == sql::ParseErrorKind::kForbiddenStatement) code = ViolationCode::kForbiddenStatement;
    if (e.kind == sql::ParseErrorKind::kMultiStatement) code = ViolationCode::kMultiStatement;
    out.violations.push_back(Violation{code, e.message, locate(text, e.offset)});
  }
  if (out.violations.empty()) out.ast = std::move(result.statement);
  return out;
}

PolicyEngine::PolicyEngine(SchemaCatalog catalog, PolicyConfig policy,
                           std::shared_ptr<const ApprovalAuthority> authority)
    : catalog_(std::move(catalog)), policy_(std::move(policy)), authority_(std::move(authority)) {
  policy_.validate();
  if (!authority_) throw Error(ErrorCode::kInvalidArgument, "policy engine needs an approval authority");
}

PolicyDecision PolicyEngine::decide(std::string_view text) const {
  PolicyDecision decision;
  if (text.size() > policy_.max_query_length) {
    decision.violations.push_back(Violation{
        ViolationCode::kQueryTooLong,
        "query is " + std::to_string(text.size()) + " characters; the limit is " +
            std::to_string(policy_.max_query_length),
        locate(text, policy_.max_query_length)});
    return decision;
  }
  auto parsed = parse_sql(text);
  if (!parsed.ast) {
    decision.violations = std::move(parsed.violations);
    return decision;
  }
  decision.violations = validate(*parsed.ast, text, catalog_, policy_);
  if (!decision.violations.empty()) return decision;

  auto rewrite = rewrite_threshold(*parsed.ast, text, policy_.k_min);
  std::string sql = sql::to_sql(rewrite.statement);
  std::string token = authority_->sign(sql);
  decision.approved = ApprovedQuery(std::move(sql), std::move(token));
  if (rewrite.probe) {
    std::string probe = sql::to_sql(*rewrite.probe);
    std::string probe_token = authority_->sign(probe);
    decision.suppression_probe = ApprovedQuery(std::move(probe), std::move(probe_token));
  }
  decision.verdict = Verdict::kApproved;
  return decision;
}

PolicyDecision decide(std::string_view text, const SchemaCatalog& catalog, const PolicyConfig& policy) {
  PolicyEngine engine(catalog, policy, ApprovalAuthority::generate());
  return engine.decide(text);
}

}  // namespace qdt
