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

#include <fstream>
#include <sstream>
#include <utility>

#include "qdt/error.hpp"
#include "qdt/policy.hpp"

namespace qdt {

using nlohmann::json;

namespace {

constexpr std::pair<ViolationCode, std::string_view> kCodeNames[] = {
    {ViolationCode::kBareProjection, "BARE_PROJECTION"},
    {ViolationCode::kIdentifierGrouping, "IDENTIFIER_GROUPING"},
    {ViolationCode::kIdentifierExposure, "IDENTIFIER_EXPOSURE"},
    {ViolationCode::kForbiddenAggregate, "FORBIDDEN_AGGREGATE"},
    {ViolationCode::kForbiddenFunction, "FORBIDDEN_FUNCTION"},
    {ViolationCode::kWindowFunction, "WINDOW_FUNCTION"},
    {ViolationCode::kForbiddenStatement, "FORBIDDEN_STATEMENT"},
    {ViolationCode::kMultiStatement, "MULTI_STATEMENT"},
    {ViolationCode::kDistinctProjection, "DISTINCT_PROJECTION"},
    {ViolationCode::kSubqueryViolation, "SUBQUERY_VIOLATION"},
    {ViolationCode::kSetOperation, "SET_OPERATION"},
    {ViolationCode::kCteForbidden, "CTE_FORBIDDEN"},
    {ViolationCode::kJoinForbidden, "JOIN_FORBIDDEN"},
    {ViolationCode::kUnknownTable, "UNKNOWN_TABLE"},
    {ViolationCode::kOrderByRaw, "ORDER_BY_RAW"},
    {ViolationCode::kParseError, "PARSE_ERROR"},
    {ViolationCode::kQueryTooLong, "QUERY_TOO_LONG"},
};

constexpr std::pair<Aggregate, std::string_view> kAggregateNames[] = {
    {Aggregate::kCount, "COUNT"},   {Aggregate::kCountDistinct, "COUNT_DISTINCT"},
    {Aggregate::kAvg, "AVG"},       {Aggregate::kSum, "SUM"},
    {Aggregate::kStddev, "STDDEV"}, {Aggregate::kVariance, "VARIANCE"},
};

Aggregate aggregate_from_string(const std::string& s) {
  for (const auto& [a, name] : kAggregateNames) {
    if (name == s) return a;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown aggregate '" + s + "' in policy");
}

}  // namespace

std::string_view to_string(ViolationCode code) {
  for (const auto& [c, name] : kCodeNames) {
    if (c == code) return name;
  }
  return "UNKNOWN";
}

std::optional<ViolationCode> violation_code_from_string(std::string_view s) {
  for (const auto& [c, name] : kCodeNames) {
    if (name == s) return c;
  }
  return std::nullopt;
}

const std::vector<ViolationCode>& all_violation_codes() {
  static const std::vector<ViolationCode> codes = [] {
    std::vector<ViolationCode> out;
    for (const auto& entry : kCodeNames) out.push_back(entry.first);
    return out;
  }();
  return codes;
}

std::string_view to_string(Aggregate a) {
  for (const auto& [agg, name] : kAggregateNames) {
    if (agg == a) return name;
  }
  return "?";
}

std::string_view to_string(Verdict v) { return v == Verdict::kApproved ? "approved" : "rejected"; }

json violation_to_json(const Violation& v) {
  return {{"code", to_string(v.code)},
          {"message", v.message},
          {"location", {{"offset", v.location.offset}, {"line", v.location.line}, {"column", v.location.column}}}};
}

Violation violation_from_json(const json& j) {
  Violation v;
  const auto code = violation_code_from_string(j.at("code").get<std::string>());
  if (!code) throw Error(ErrorCode::kParse, "unknown violation code " + j.at("code").dump());
  v.code = *code;
  v.message = j.value("message", "");
  if (j.contains("location")) {
    const auto& loc = j.at("location");
    v.location.offset = loc.value("offset", std::size_t{0});
    v.location.line = loc.value("line", std::size_t{1});
    v.location.column = loc.value("column", std::size_t{1});
  }
  return v;
}

void PolicyConfig::validate() const {
  if (k_min < kMinimumK) {
    throw Error(ErrorCode::kInvalidArgument,
                "k_min must be at least " + std::to_string(kMinimumK) + ", got " + std::to_string(k_min));
  }
  if (max_rows == 0) throw Error(ErrorCode::kInvalidArgument, "max_rows must be positive");
  if (max_query_length == 0) throw Error(ErrorCode::kInvalidArgument, "max_query_length must be positive");
}

PolicyConfig PolicyConfig::from_json(const json& j) {
  PolicyConfig cfg;
  try {
    cfg.k_min = j.value("k_min", cfg.k_min);
    if (j.contains("allowed_aggregates")) {
      cfg.allowed_aggregates.clear();
      for (const auto& a : j.at("allowed_aggregates")) {
        cfg.allowed_aggregates.insert(aggregate_from_string(a.get<std::string>()));
      }
    }
    cfg.allow_min_max = j.value("allow_min_max", cfg.allow_min_max);
    if (j.contains("denied_columns")) {
      cfg.denied_columns = j.at("denied_columns").get<std::set<std::string>>();
    }
    cfg.max_rows = j.value("max_rows", cfg.max_rows);
    cfg.max_query_length = j.value("max_query_length", cfg.max_query_length);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("policy config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PolicyConfig PolicyConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open policy config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return from_json(j);
}

json PolicyConfig::to_json() const {
  json aggs = json::array();
  for (auto a : allowed_aggregates) aggs.push_back(to_string(a));
  return {{"k_min", k_min},
          {"allowed_aggregates", aggs},
          {"allow_min_max", allow_min_max},
          {"denied_columns", denied_columns},
          {"max_rows", max_rows},
          {"max_query_length", max_query_length}};
}

std::string PolicyConfig::summary() const {
  std::ostringstream out;
  out << "- Only SELECT statements, one per request.\n"
      << "- Every output column must be an aggregate or a GROUP BY key; row-level output is rejected.\n"
      << "- Allowed aggregates: ";
  bool first = true;
  for (auto a : allowed_aggregates) {
    out << (first ? "" : ", ") << (a == Aggregate::kCountDistinct ? "COUNT(DISTINCT ...)" : to_string(a));
    first = false;
  }
  if (allow_min_max) out << ", MIN, MAX";
  out << ".\n"
      << "- Identifier columns may only be used in WHERE filters or COUNT(DISTINCT ...); never grouped or "
         "projected.\n"
      << "- Groups (or whole result sets) covering fewer than " << k_min
      << " rows are silently suppressed.\n"
      << "- No JOINs, set operations (UNION/INTERSECT/EXCEPT), WITH clauses, window functions, or DISTINCT "
         "row projections.\n"
      << "- ORDER BY may reference only projected columns, their aliases or positions, or aggregates.\n"
      << "- Results are capped at " << max_rows << " rows; queries longer than " << max_query_length
      << " characters are rejected.\n";
  return out.str();
}

}  // namespace qdt
