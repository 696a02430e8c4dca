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

#include "policy/ast_util.hpp"

#include <algorithm>
#include <string>

#include "qdt/schema.hpp"
#include "qdt/sql/printer.hpp"

namespace qdt::policy_detail {
namespace {

constexpr std::string_view kForbiddenAggregates[] = {
    "TOTAL",          "GROUP_CONCAT",      "STRING_AGG",        "JSON_GROUP_ARRAY",
    "JSON_GROUP_OBJECT", "JSONB_GROUP_ARRAY", "JSONB_GROUP_OBJECT", "MEDIAN",
    "PERCENTILE",     "PERCENTILE_CONT",   "PERCENTILE_DISC",   "MODE",
    "ANY_VALUE",      "BIT_AND",           "BIT_OR",            "BIT_XOR",
    "ARRAY_AGG",
};

// Deterministic scalar helpers that cannot reach other rows or the host.
constexpr std::string_view kScalarFunctions[] = {
    "ABS",   "ROUND", "COALESCE", "IFNULL", "NULLIF",  "LENGTH", "LOWER",   "UPPER",
    "SUBSTR", "SUBSTRING", "TRIM", "LTRIM", "RTRIM",   "IIF",    "INSTR",   "REPLACE",
    "TYPEOF", "SIGN",  "MIN",     "MAX",
};

template <std::size_t N>
bool contains(const std::string_view (&list)[N], std::string_view upper) {
  return std::find(std::begin(list), std::end(list), upper) != std::end(list);
}

}  // namespace

FunctionInfo classify(const sql::FunctionCall& call) {
  const std::string upper = to_upper(call.name);
  FunctionInfo info;
  if (upper == "COUNT") {
    info.kind = FunctionKind::kAggregate;
    info.aggregate = call.distinct ? Aggregate::kCountDistinct : Aggregate::kCount;
  } else if (upper == "AVG") {
    info.kind = FunctionKind::kAggregate;
    info.aggregate = Aggregate::kAvg;
  } else if (upper == "SUM") {
    info.kind = FunctionKind::kAggregate;
    info.aggregate = Aggregate::kSum;
  } else if (upper == "STDDEV" || upper == "STDDEV_SAMP" || upper == "STDDEV_POP") {
    info.kind = FunctionKind::kAggregate;
    info.aggregate = Aggregate::kStddev;
  } else if (upper == "VARIANCE" || upper == "VAR_SAMP" || upper == "VAR_POP") {
    info.kind = FunctionKind::kAggregate;
    info.aggregate = Aggregate::kVariance;
  } else if ((upper == "MIN" || upper == "MAX") && call.args.size() == 1 && !call.star) {
    info.kind = FunctionKind::kAggregate;
    info.min_max = true;
  } else if (contains(kForbiddenAggregates, upper)) {
    info.kind = FunctionKind::kAggregate;
  } else if (contains(kScalarFunctions, upper)) {
    info.kind = FunctionKind::kScalar;
  }
  return info;
}

bool contains_aggregate(const sql::Expr& e) {
  if (const auto* call = e.as<sql::FunctionCall>()) {
    if (!call->windowed && classify(*call).kind == FunctionKind::kAggregate) return true;
  }
  bool found = false;
  for_each_child(e, [&](const sql::Expr& child) {
    if (!found) found = contains_aggregate(child);
  });
  return found;
}

bool is_aggregating(const sql::SelectCore& core, const std::vector<sql::OrderItem>* order_by) {
  if (!core.group_by.empty()) return true;
  for (const auto& item : core.items) {
    if (item.expr && contains_aggregate(*item.expr)) return true;
  }
  if (core.having && contains_aggregate(*core.having)) return true;
  if (order_by) {
    for (const auto& o : *order_by) {
      if (contains_aggregate(o.expr)) return true;
    }
  }
  return false;
}

std::string output_name(const sql::SelectItem& item, std::string_view text) {
  if (item.has_alias) return item.alias;
  if (!item.expr) return "*";
  if (const auto* col = item.expr->as<sql::ColumnRef>()) return col->name;
  if (item.end > item.begin && item.end <= text.size()) {
    return std::string(text.substr(item.begin, item.end - item.begin));
  }
  return sql::to_sql(*item.expr);
}

}  // namespace qdt::policy_detail
