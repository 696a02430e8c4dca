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

#include <string>
#include <utility>

#include "policy/ast_util.hpp"
#include "qdt/policy.hpp"
#include "qdt/sql/printer.hpp"

namespace qdt {
namespace {

using policy_detail::for_each_child;
using policy_detail::nested_query;
using sql::Expr;
using sql::SelectCore;
using sql::SelectItem;
using sql::SelectStatement;

constexpr const char* kGateAlias = "_qdt_gate";
constexpr const char* kProbeAlias = "_qdt_probe";
constexpr const char* kCountColumn = "_qdt_n";

Expr count_star() {
  sql::FunctionCall call;
  call.name = "COUNT";
  call.star = true;
  return Expr{std::move(call)};
}

Expr integer(int value) { return Expr{sql::Literal{sql::Literal::Kind::kInteger, std::to_string(value)}}; }

Expr column(std::string qualifier, std::string name) {
  return Expr{sql::ColumnRef{std::move(qualifier), std::move(name), false, false}};
}

Expr binary(std::string op, Expr lhs, Expr rhs) {
  return Expr{sql::Binary{std::move(op), std::move(lhs), std::move(rhs), {}}};
}

SelectItem aliased(Expr e, std::string alias, bool quoted) {
  SelectItem item;
  item.expr = std::move(e);
  item.alias = std::move(alias);
  item.has_alias = true;
  item.quoted_alias = quoted;
  return item;
}

sql::TableRef derived(SelectStatement inner, std::string alias) {
  sql::TableRef ref;
  ref.subquery = std::move(inner);
  ref.alias = std::move(alias);
  return ref;
}

class Rewriter {
 public:
  Rewriter(std::string_view text, int k) : text_(text), k_(k) {}

  std::optional<SelectStatement> probe;

  void statement(SelectStatement& s, bool top) {
    for (auto& cte : s.ctes) statement(*cte.query, false);
    core_nested(s.core);
    for (auto& part : s.compounds) core_nested(part.core);
    for (auto& o : s.order_by) expr(o.expr);
    if (s.limit) expr(*s.limit);
    if (s.offset) expr(*s.offset);

    name_items(s.core);
    for (auto& part : s.compounds) name_items(part.core);

    if (!s.compounds.empty() || !policy_detail::is_aggregating(s.core, &s.order_by)) return;
    if (!s.core.group_by.empty()) {
      if (top) probe = grouped_probe(s.core);
      Expr gate = binary(">=", count_star(), integer(k_));
      s.core.having = s.core.having ? binary("AND", std::move(*s.core.having), std::move(gate)) : std::move(gate);
    } else {
      if (top) probe = scalar_probe(s.core);
      wrap(s);
    }
  }

 private:
  void expr(Expr& e) {
    if (auto* q = nested_query(e)) statement(*q, false);
    for_each_child(e, [&](Expr& child) { expr(child); });
  }

  void core_nested(SelectCore& c) {
    for (auto& item : c.items) {
      if (item.expr) expr(*item.expr);
    }
    for (auto& ref : c.from) {
      if (ref.subquery) statement(*ref.subquery, false);
      if (ref.on) expr(*ref.on);
    }
    if (c.where) expr(*c.where);
    for (auto& g : c.group_by) expr(g);
    if (c.having) expr(*c.having);
  }

  // Canonical printing changes the text SQLite would use as the column name;
  // pin the name to what was written.
  void name_items(SelectCore& c) {
    for (auto& item : c.items) {
      if (item.wildcard || item.has_alias || !item.expr || item.expr->as<sql::ColumnRef>()) continue;
      if (item.end <= item.begin || item.end > text_.size()) continue;
      std::string written(text_.substr(item.begin, item.end - item.begin));
      if (written == sql::to_sql(*item.expr)) continue;
      item.alias = std::move(written);
      item.has_alias = true;
      item.quoted_alias = true;
    }
  }

  // SELECT _qdt_gate._qdt_c0 AS "<name>", ...
  // FROM (SELECT <items AS _qdt_cN>, COUNT(*) AS _qdt_n ...) AS _qdt_gate
  // WHERE _qdt_gate._qdt_n >= k
  void wrap(SelectStatement& s) {
    SelectCore inner = std::move(s.core);
    SelectCore outer;
    for (std::size_t i = 0; i < inner.items.size(); ++i) {
      auto& item = inner.items[i];
      const std::string name = policy_detail::output_name(item, text_);
      const std::string slot = "_qdt_c" + std::to_string(i);
      item.alias = slot;
      item.has_alias = true;
      item.quoted_alias = false;
      outer.items.push_back(aliased(column(kGateAlias, slot), name, true));
    }
    inner.items.push_back(aliased(count_star(), kCountColumn, false));
    SelectStatement inner_stmt;
    inner_stmt.core = std::move(inner);
    outer.from.push_back(derived(std::move(inner_stmt), kGateAlias));
    outer.where = binary(">=", column(kGateAlias, kCountColumn), integer(k_));
    s.core = std::move(outer);
    // A single-row result has nothing to order.
    s.order_by.clear();
  }

  // SELECT COUNT(*) FROM (SELECT ... GROUP BY ... HAVING [<having> AND] COUNT(*) < k) AS _qdt_probe
  SelectStatement grouped_probe(const SelectCore& c) const {
    SelectStatement inner;
    inner.core = c;
    Expr small = binary("<", count_star(), integer(k_));
    inner.core.having = c.having ? binary("AND", *c.having, std::move(small)) : std::move(small);
    SelectStatement outer;
    outer.core.items.push_back(aliased(count_star(), "suppressed", false));
    outer.core.from.push_back(derived(std::move(inner), kProbeAlias));
    return outer;
  }

  // SELECT COUNT(*) FROM (SELECT COUNT(*) AS _qdt_n FROM ... WHERE ...) AS _qdt_probe
  // WHERE _qdt_probe._qdt_n < k
  SelectStatement scalar_probe(const SelectCore& c) const {
    SelectStatement inner;
    inner.core.items.push_back(aliased(count_star(), kCountColumn, false));
    inner.core.from = c.from;
    inner.core.where = c.where;
    SelectStatement outer;
    outer.core.items.push_back(aliased(count_star(), "suppressed", false));
    outer.core.from.push_back(derived(std::move(inner), kProbeAlias));
    outer.core.where = binary("<", column(kProbeAlias, kCountColumn), integer(k_));
    return outer;
  }

  std::string_view text_;
  int k_;
};

}  // namespace

ThresholdRewrite rewrite_threshold(const SelectStatement& ast, std::string_view text, int k) {
  Rewriter rewriter(text, k);
  ThresholdRewrite out{ast, std::nullopt};
  rewriter.statement(out.statement, true);
  out.probe = std::move(rewriter.probe);
  return out;
}

}  // namespace qdt
