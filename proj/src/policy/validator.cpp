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

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "policy/ast_util.hpp"
#include "qdt/policy.hpp"
#include "qdt/sql/printer.hpp"

namespace qdt {
namespace {

using policy_detail::classify;
using policy_detail::FunctionKind;
using policy_detail::for_each_child;
using policy_detail::nested_query;
using sql::ColumnRef;
using sql::Expr;
using sql::FunctionCall;
using sql::SelectCore;
using sql::SelectStatement;

enum class Source { kNone, kBase, kDerived };

struct Scope {
  const Scope* parent = nullptr;
  Source source = Source::kNone;
  const TableMeta* table = nullptr;
  std::vector<std::string> qualifiers;  // lower-case
  std::vector<std::string> columns;     // lower-case output names of a derived source
  bool columns_known = false;
  const SelectCore* core = nullptr;
};

enum class Resolution { kLocal, kAlias, kOuter, kUnknownQualifier };

struct Resolved {
  Resolution kind = Resolution::kLocal;
  const Scope* scope = nullptr;
};

struct CoreInfo {
  Scope scope;
  bool aggregating = false;
  std::vector<const Expr*> keys;  // GROUP BY terms plus what they resolve to
};

constexpr std::string_view kRowidNames[] = {"rowid", "oid", "_rowid_"};

bool is_rowid(std::string_view lower) {
  return std::find(std::begin(kRowidNames), std::end(kRowidNames), lower) != std::end(kRowidNames);
}

bool has_column(const Scope& s, const std::string& lower) {
  switch (s.source) {
    case Source::kBase: return s.table->find(lower) != nullptr || is_rowid(lower);
    case Source::kDerived:
      return !s.columns_known || std::find(s.columns.begin(), s.columns.end(), lower) != s.columns.end();
    case Source::kNone: return false;
  }
  return false;
}

bool has_qualifier(const Scope& s, const std::string& lower) {
  return std::find(s.qualifiers.begin(), s.qualifiers.end(), lower) != s.qualifiers.end();
}

const sql::SelectItem* find_alias(const SelectCore& core, std::string_view name) {
  for (const auto& item : core.items) {
    if (item.has_alias && iequals(item.alias, name)) return &item;
  }
  return nullptr;
}

Resolved resolve(const ColumnRef& col, const Scope& scope) {
  if (!col.qualifier.empty()) {
    const std::string q = to_lower(col.qualifier);
    for (const Scope* s = &scope; s; s = s->parent) {
      if (has_qualifier(*s, q)) return {s == &scope ? Resolution::kLocal : Resolution::kOuter, s};
    }
    return {Resolution::kUnknownQualifier, nullptr};
  }
  const std::string name = to_lower(col.name);
  if (has_column(scope, name)) return {Resolution::kLocal, &scope};
  if (scope.core && find_alias(*scope.core, name)) return {Resolution::kAlias, &scope};
  for (const Scope* s = scope.parent; s; s = s->parent) {
    if (has_column(*s, name)) return {Resolution::kOuter, s};
  }
  // Unresolvable; execution reports it.
  return {Resolution::kLocal, &scope};
}

std::optional<std::vector<std::string>> output_columns(const SelectStatement& stmt, std::string_view text,
                                                       const SchemaCatalog& catalog) {
  std::vector<std::string> out;
  for (const auto& item : stmt.core.items) {
    if (!item.wildcard) {
      out.push_back(to_lower(policy_detail::output_name(item, text)));
      continue;
    }
    if (stmt.core.from.size() != 1) return std::nullopt;
    const auto& ref = stmt.core.from.front();
    if (ref.subquery) {
      auto inner = output_columns(*ref.subquery, text, catalog);
      if (!inner) return std::nullopt;
      out.insert(out.end(), inner->begin(), inner->end());
    } else if (const auto* t = catalog.find_table(ref.name)) {
      for (const auto& c : t->columns) out.push_back(to_lower(c.name));
    } else {
      return std::nullopt;
    }
  }
  return out;
}

class Validator {
 public:
  Validator(std::string_view text, const SchemaCatalog& catalog, const PolicyConfig& policy)
      : text_(text), catalog_(catalog), policy_(policy) {
    for (const auto& t : catalog.tables) {
      for (const auto& name : t.names_with_role(ColumnRole::kIdentifier)) denied_.insert(to_lower(name));
    }
    for (const auto& name : policy.denied_columns) denied_.insert(to_lower(name));
    for (auto name : kRowidNames) denied_.insert(std::string(name));
  }

  std::vector<Violation> statement(const SelectStatement& s, const Scope* parent) {
    std::vector<Violation> out;
    if (!s.ctes.empty()) {
      add(out, ViolationCode::kCteForbidden, "WITH clauses are not allowed", s.with_begin);
      for (const auto& cte : s.ctes) cte_names_.insert(to_lower(cte.name));
    }
    const bool compound = !s.compounds.empty();
    CoreInfo first = core(s.core, parent, compound ? nullptr : &s.order_by, out);
    for (const auto& part : s.compounds) {
      add(out, ViolationCode::kSetOperation, part.op + " is not allowed", part.begin);
      core(part.core, parent, nullptr, out);
    }
    order_by(s, first, compound, out);
    if (s.limit) scan(*s.limit, first.scope, out);
    if (s.offset) scan(*s.offset, first.scope, out);
    return out;
  }

 private:
  void add(std::vector<Violation>& out, ViolationCode code, std::string message, std::size_t offset) {
    out.push_back(Violation{code, std::move(message), locate(text_, offset)});
  }

  std::string source_text(const Expr& e) const {
    if (e.end > e.begin && e.end <= text_.size()) return std::string(text_.substr(e.begin, e.end - e.begin));
    return sql::to_sql(e);
  }

  void nested(const SelectStatement& q, const Scope* parent, std::vector<Violation>& out) {
    for (auto& v : statement(q, parent)) {
      if (v.code != ViolationCode::kSubqueryViolation) {
        v.message = "subquery: " + std::string(to_string(v.code)) + ": " + v.message;
        v.code = ViolationCode::kSubqueryViolation;
      }
      out.push_back(std::move(v));
    }
  }

  CoreInfo core(const SelectCore& c, const Scope* parent, const std::vector<sql::OrderItem>* order,
                std::vector<Violation>& out) {
    CoreInfo info;
    Scope& scope = info.scope;
    scope.parent = parent;
    scope.core = &c;

    if (c.from.size() > 1) add(out, ViolationCode::kJoinForbidden, "joins are not allowed", c.from[1].begin);
    for (std::size_t i = 0; i < c.from.size(); ++i) {
      const auto& ref = c.from[i];
      if (ref.subquery) {
        nested(*ref.subquery, parent, out);
      } else if (!ref.schema.empty() && !iequals(ref.schema, "main")) {
        add(out, ViolationCode::kUnknownTable, "unknown schema '" + ref.schema + "'", ref.begin);
      } else if (!catalog_.find_table(ref.name) && !cte_names_.count(to_lower(ref.name))) {
        add(out, ViolationCode::kUnknownTable, "unknown table '" + ref.name + "'", ref.begin);
      }
      scope.qualifiers.push_back(to_lower(ref.alias.empty() ? ref.name : ref.alias));
    }
    if (!c.from.empty()) {
      const auto& ref = c.from.front();
      const TableMeta* table = ref.subquery ? nullptr : catalog_.find_table(ref.name);
      if (table && (ref.schema.empty() || iequals(ref.schema, "main"))) {
        scope.source = Source::kBase;
        scope.table = table;
      } else {
        scope.source = Source::kDerived;
        if (ref.subquery) {
          if (auto cols = output_columns(*ref.subquery, text_, catalog_)) {
            scope.columns = std::move(*cols);
            scope.columns_known = true;
          }
        }
      }
    }
    for (const auto& ref : c.from) {
      if (ref.on) scan(*ref.on, scope, out);
    }
    if (c.window_clause) add(out, ViolationCode::kWindowFunction, "WINDOW clauses are not allowed", c.begin);

    info.aggregating = policy_detail::is_aggregating(c, order);

    for (const auto& g : c.group_by) {
      scan(g, scope, out);
      std::vector<const Expr*> resolved{&g};
      if (const auto* lit = g.as<sql::Literal>(); lit && lit->kind == sql::Literal::Kind::kInteger) {
        const long long n = std::stoll(lit->text);
        if (n >= 1 && static_cast<std::size_t>(n) <= c.items.size() && c.items[n - 1].expr) {
          resolved.push_back(c.items[n - 1].expr.get());
        }
      } else if (const auto* col = g.as<ColumnRef>(); col && col->qualifier.empty()) {
        if (const auto* item = find_alias(c, col->name); item && item->expr) resolved.push_back(item->expr.get());
      }
      for (const Expr* key : resolved) {
        if (auto name = identifier_in(*key, scope); !name.empty()) {
          add(out, ViolationCode::kIdentifierGrouping, "grouping by identifier column '" + name + "'", g.begin);
          break;
        }
      }
      info.keys.insert(info.keys.end(), resolved.begin(), resolved.end());
    }

    bool row_level_flagged = false;
    const ViolationCode row_code =
        c.distinct ? ViolationCode::kDistinctProjection : ViolationCode::kBareProjection;
    for (const auto& item : c.items) {
      if (item.wildcard) {
        if (scope.source == Source::kBase && !info.aggregating) {
          add(out, row_code, "SELECT * returns individual records", item.begin);
          row_level_flagged = true;
        } else if (info.aggregating) {
          add(out, ViolationCode::kBareProjection, "* in an aggregate query returns non-aggregated values",
              item.begin);
        }
        continue;
      }
      const Expr& e = *item.expr;
      scan(e, scope, out);
      outer_refs(e, scope, out);
      if (info.aggregating) {
        coverage(e, info.keys, scope, ViolationCode::kBareProjection, out);
      } else if (scope.source == Source::kBase) {
        if (auto name = local_column_in(e, scope); !name.empty()) {
          add(out, row_code,
              c.distinct ? "DISTINCT projection of column '" + name + "' returns individual values"
                         : "column '" + name + "' is projected without aggregation",
              e.begin);
          row_level_flagged = true;
        }
      }
    }
    if (scope.source == Source::kBase && !info.aggregating && !row_level_flagged) {
      add(out, row_code, "query returns one row per record; aggregate or group the data", c.begin);
    }
    if (c.where) scan(*c.where, scope, out);
    if (c.having) {
      scan(*c.having, scope, out);
      having_identifiers(*c.having, scope, out);
    }
    return info;
  }

  void order_by(const SelectStatement& s, const CoreInfo& first, bool compound, std::vector<Violation>& out) {
    const SelectCore& c = s.core;
    for (const auto& o : s.order_by) {
      scan(o.expr, first.scope, out);
      const Expr* e = &o.expr;
      while (const auto* coll = e->as<sql::Collate>()) e = coll->operand.get();
      if (const auto* lit = e->as<sql::Literal>(); lit && lit->kind == sql::Literal::Kind::kInteger) {
        const long long n = std::stoll(lit->text);
        if (n < 1 || static_cast<std::size_t>(n) > c.items.size()) {
          add(out, ViolationCode::kOrderByRaw, "ORDER BY position " + lit->text + " is out of range", e->begin);
        }
        continue;
      }
      if (const auto* col = e->as<ColumnRef>(); col && col->qualifier.empty() && find_alias(c, col->name)) {
        continue;
      }
      std::vector<const Expr*> allowed = first.keys;
      for (const auto& item : c.items) {
        if (item.expr) allowed.push_back(item.expr.get());
      }
      if (compound) {
        const bool projected = std::any_of(allowed.begin(), allowed.end(),
                                           [&](const Expr* a) { return sql::same_expr(*a, *e); });
        if (!projected) {
          add(out, ViolationCode::kOrderByRaw, "ORDER BY '" + source_text(*e) + "' is not a result column",
              e->begin);
        }
      } else if (first.aggregating) {
        coverage(*e, allowed, first.scope, ViolationCode::kOrderByRaw, out);
      }
    }
  }

  // Functions, aggregates, nested queries and qualifiers anywhere in e.
  void scan(const Expr& e, const Scope& scope, std::vector<Violation>& out) {
    if (const auto* call = e.as<FunctionCall>()) {
      if (call->windowed) {
        add(out, ViolationCode::kWindowFunction, "window function " + call->name + "() OVER is not allowed",
            e.begin);
      }
      const auto info = classify(*call);
      if (info.kind == FunctionKind::kAggregate) {
        if (!call->windowed) check_aggregate(e, *call, info, scope, out);
      } else if (info.kind == FunctionKind::kUnknown) {
        add(out, ViolationCode::kForbiddenFunction, "function " + call->name + "() is not allowed", e.begin);
      }
    } else if (const auto* col = e.as<ColumnRef>()) {
      if (resolve(*col, scope).kind == Resolution::kUnknownQualifier) {
        add(out, ViolationCode::kUnknownTable, "unknown table or alias '" + col->qualifier + "'", e.begin);
      }
    }
    if (const auto* q = nested_query(e)) nested(*q, &scope, out);
    for_each_child(e, [&](const Expr& child) { scan(child, scope, out); });
  }

  void check_aggregate(const Expr& e, const FunctionCall& call, const policy_detail::FunctionInfo& info,
                       const Scope& scope, std::vector<Violation>& out) {
    const std::string upper = to_upper(call.name);
    if (call.filter) {
      add(out, ViolationCode::kForbiddenAggregate, "FILTER clauses on aggregates are not allowed", e.begin);
    }
    if (call.distinct && info.aggregate != Aggregate::kCountDistinct) {
      add(out, ViolationCode::kForbiddenAggregate, "DISTINCT is only allowed inside COUNT", e.begin);
    }
    if (info.min_max) {
      if (!policy_.allow_min_max) {
        add(out, ViolationCode::kForbiddenAggregate, upper + " is not allowed", e.begin);
      }
    } else if (!info.aggregate) {
      add(out, ViolationCode::kForbiddenAggregate, "aggregate " + upper + " is not allowed", e.begin);
    } else if (!policy_.allowed_aggregates.count(*info.aggregate)) {
      add(out, ViolationCode::kForbiddenAggregate,
          "aggregate " + std::string(to_string(*info.aggregate)) + " is disabled", e.begin);
    }
    if (info.aggregate != Aggregate::kCountDistinct) {
      for (const auto& arg : call.args) {
        if (auto name = identifier_in(arg, scope); !name.empty()) {
          add(out, ViolationCode::kIdentifierExposure,
              "identifier column '" + name + "' inside " + upper + "()", arg.begin);
        }
      }
    }
  }

  // Name of an identifier column referenced by e (outside nested queries).
  std::string identifier_in(const Expr& e, const Scope& scope) const {
    if (const auto* col = e.as<ColumnRef>()) {
      const auto r = resolve(*col, scope);
      const bool base = (r.kind == Resolution::kLocal || r.kind == Resolution::kOuter) && r.scope &&
                        r.scope->source == Source::kBase;
      if (base && denied_.count(to_lower(col->name))) return col->name;
      return {};
    }
    std::string found;
    for_each_child(e, [&](const Expr& child) {
      if (found.empty()) found = identifier_in(child, scope);
    });
    return found;
  }

  // Name of a column of the current source referenced by e (outside nested queries).
  std::string local_column_in(const Expr& e, const Scope& scope) const {
    if (const auto* col = e.as<ColumnRef>()) {
      return resolve(*col, scope).kind == Resolution::kLocal ? col->name : std::string();
    }
    std::string found;
    for_each_child(e, [&](const Expr& child) {
      if (found.empty()) found = local_column_in(child, scope);
    });
    return found;
  }

  // Identifier columns in HAVING outside aggregate calls; aggregate
  // arguments are checked by check_aggregate.
  void having_identifiers(const Expr& e, const Scope& scope, std::vector<Violation>& out) {
    if (const auto* call = e.as<FunctionCall>()) {
      if (!call->windowed && classify(*call).kind == FunctionKind::kAggregate) return;
    }
    if (e.as<ColumnRef>()) {
      if (auto name = identifier_in(e, scope); !name.empty()) {
        add(out, ViolationCode::kIdentifierExposure, "identifier column '" + name + "' in HAVING", e.begin);
      }
      return;
    }
    for_each_child(e, [&](const Expr& child) { having_identifiers(child, scope, out); });
  }

  void outer_refs(const Expr& e, const Scope& scope, std::vector<Violation>& out) {
    if (const auto* col = e.as<ColumnRef>()) {
      if (resolve(*col, scope).kind == Resolution::kOuter) {
        add(out, ViolationCode::kBareProjection,
            "correlated reference to outer column '" + col->name + "' in the select list", e.begin);
      }
      return;
    }
    for_each_child(e, [&](const Expr& child) { outer_refs(child, scope, out); });
  }

  // Flags column references in e not covered by a key or an aggregate.
  void coverage(const Expr& e, const std::vector<const Expr*>& keys, const Scope& scope, ViolationCode code,
                std::vector<Violation>& out) {
    for (const Expr* key : keys) {
      if (sql::same_expr(e, *key)) return;
    }
    if (const auto* call = e.as<FunctionCall>()) {
      if (!call->windowed && classify(*call).kind == FunctionKind::kAggregate) return;
    }
    if (nested_query(e)) return;
    if (const auto* col = e.as<ColumnRef>()) {
      const auto r = resolve(*col, scope);
      if (r.kind == Resolution::kOuter || r.kind == Resolution::kUnknownQualifier) return;
      if (r.kind == Resolution::kAlias && code == ViolationCode::kOrderByRaw) return;
      add(out, code,
          code == ViolationCode::kOrderByRaw
              ? "ORDER BY column '" + col->name + "' is neither projected, grouped nor aggregated"
              : "column '" + col->name + "' is neither aggregated nor a GROUP BY key",
          e.begin);
      return;
    }
    for_each_child(e, [&](const Expr& child) { coverage(child, keys, scope, code, out); });
  }

  std::string_view text_;
  const SchemaCatalog& catalog_;
  const PolicyConfig& policy_;
  std::set<std::string> denied_;
  std::set<std::string> cte_names_;
};

}  // namespace

std::vector<Violation> validate(const SelectStatement& ast, std::string_view text, const SchemaCatalog& catalog,
                                const PolicyConfig& policy) {
  Validator validator(text, catalog, policy);
  return validator.statement(ast, nullptr);
}

}  // namespace qdt
