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

#include "qdt/sql/ast.hpp"

#include "qdt/schema.hpp"
#include "qdt/sql/printer.hpp"

namespace qdt::sql {
namespace {

bool same_box(const Box<Expr>& a, const Box<Expr>& b) {
  if (!a || !b) return !a && !b;
  return same_expr(*a, *b);
}

bool same_list(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_expr(a[i], b[i])) return false;
  }
  return true;
}

// Subqueries compare by canonical text.
bool same_query(const Box<SelectStatement>& a, const Box<SelectStatement>& b) {
  if (!a || !b) return !a && !b;
  return to_sql(*a) == to_sql(*b);
}

struct Compare {
  const Expr::Node& other;

  bool operator()(const Literal& x) const {
    const auto& y = std::get<Literal>(other);
    return x.kind == y.kind && (x.kind == Literal::Kind::kString ? x.text == y.text : iequals(x.text, y.text));
  }
  bool operator()(const ColumnRef& x) const {
    return iequals(x.name, std::get<ColumnRef>(other).name);
  }
  bool operator()(const Unary& x) const {
    const auto& y = std::get<Unary>(other);
    return x.op == y.op && same_box(x.operand, y.operand);
  }
  bool operator()(const Binary& x) const {
    const auto& y = std::get<Binary>(other);
    return x.op == y.op && same_box(x.lhs, y.lhs) && same_box(x.rhs, y.rhs) &&
           same_box(x.escape, y.escape);
  }
  bool operator()(const Between& x) const {
    const auto& y = std::get<Between>(other);
    return x.negated == y.negated && same_box(x.operand, y.operand) && same_box(x.low, y.low) &&
           same_box(x.high, y.high);
  }
  bool operator()(const InList& x) const {
    const auto& y = std::get<InList>(other);
    return x.negated == y.negated && same_box(x.operand, y.operand) && same_list(x.items, y.items);
  }
  bool operator()(const InSubquery& x) const {
    const auto& y = std::get<InSubquery>(other);
    return x.negated == y.negated && same_box(x.operand, y.operand) && same_query(x.query, y.query);
  }
  bool operator()(const Exists& x) const { return same_query(x.query, std::get<Exists>(other).query); }
  bool operator()(const ScalarSubquery& x) const {
    return same_query(x.query, std::get<ScalarSubquery>(other).query);
  }
  bool operator()(const FunctionCall& x) const {
    const auto& y = std::get<FunctionCall>(other);
    return iequals(x.name, y.name) && x.distinct == y.distinct && x.star == y.star &&
           x.windowed == y.windowed && same_list(x.args, y.args) && same_box(x.filter, y.filter);
  }
  bool operator()(const Case& x) const {
    const auto& y = std::get<Case>(other);
    if (x.whens.size() != y.whens.size()) return false;
    for (std::size_t i = 0; i < x.whens.size(); ++i) {
      if (!same_expr(x.whens[i].condition, y.whens[i].condition) ||
          !same_expr(x.whens[i].result, y.whens[i].result)) {
        return false;
      }
    }
    return same_box(x.operand, y.operand) && same_box(x.otherwise, y.otherwise);
  }
  bool operator()(const Cast& x) const {
    const auto& y = std::get<Cast>(other);
    return iequals(x.type_name, y.type_name) && same_box(x.operand, y.operand);
  }
  bool operator()(const Collate& x) const {
    const auto& y = std::get<Collate>(other);
    return iequals(x.collation, y.collation) && same_box(x.operand, y.operand);
  }
};

}  // namespace

bool same_expr(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(Compare{b.node}, a.node);
}

}  // namespace qdt::sql
