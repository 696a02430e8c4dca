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

#ifndef QDT_SRC_POLICY_AST_UTIL_HPP_
#define QDT_SRC_POLICY_AST_UTIL_HPP_

#include <optional>
#include <string_view>
#include <type_traits>
#include <vector>

#include "qdt/policy.hpp"
#include "qdt/sql/ast.hpp"

namespace qdt::policy_detail {

/// Calls f on each direct child expression of e. Nested queries are not
/// children; see nested_query().
template <class E, class F>
void for_each_child(E& e, F&& f) {
  using sql::Between, sql::Binary, sql::Case, sql::Cast, sql::Collate, sql::FunctionCall,
      sql::InList, sql::InSubquery, sql::Unary;
  auto box = [&](auto& b) {
    if (b) f(*b);
  };
  if (auto* u = e.template as<Unary>()) {
    box(u->operand);
  } else if (auto* b = e.template as<Binary>()) {
    box(b->lhs);
    box(b->rhs);
    box(b->escape);
  } else if (auto* bt = e.template as<Between>()) {
    box(bt->operand);
    box(bt->low);
    box(bt->high);
  } else if (auto* in = e.template as<InList>()) {
    box(in->operand);
    for (auto& item : in->items) f(item);
  } else if (auto* iq = e.template as<InSubquery>()) {
    box(iq->operand);
  } else if (auto* fn = e.template as<FunctionCall>()) {
    for (auto& a : fn->args) f(a);
    box(fn->filter);
  } else if (auto* c = e.template as<Case>()) {
    box(c->operand);
    for (auto& w : c->whens) {
      f(w.condition);
      f(w.result);
    }
    box(c->otherwise);
  } else if (auto* c = e.template as<Cast>()) {
    box(c->operand);
  } else if (auto* c = e.template as<Collate>()) {
    box(c->operand);
  }
}

/// The query nested directly in e (IN (SELECT ..), EXISTS, scalar subquery).
template <class E>
auto nested_query(E& e) -> std::conditional_t<std::is_const_v<E>, const sql::SelectStatement*,
                                              sql::SelectStatement*> {
  if (auto* q = e.template as<sql::InSubquery>()) return q->query.get();
  if (auto* q = e.template as<sql::Exists>()) return q->query.get();
  if (auto* q = e.template as<sql::ScalarSubquery>()) return q->query.get();
  return nullptr;
}

enum class FunctionKind { kAggregate, kScalar, kUnknown };

struct FunctionInfo {
  FunctionKind kind = FunctionKind::kUnknown;
  std::optional<Aggregate> aggregate;  // set for permitted-class aggregates
  bool min_max = false;                // one-argument MIN/MAX
};

FunctionInfo classify(const sql::FunctionCall& call);

/// True if e contains a non-windowed aggregate call outside nested queries.
bool contains_aggregate(const sql::Expr& e);

/// True if the core aggregates (GROUP BY, or an aggregate call in the
/// projection, HAVING, or the given ORDER BY).
bool is_aggregating(const sql::SelectCore& core, const std::vector<sql::OrderItem>* order_by);

/// Name SQLite gives a result column: alias, column name, or source text.
std::string output_name(const sql::SelectItem& item, std::string_view text);

}  // namespace qdt::policy_detail

#endif  // QDT_SRC_POLICY_AST_UTIL_HPP_
