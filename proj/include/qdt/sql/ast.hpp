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

#ifndef QDT_SQL_AST_HPP_
#define QDT_SQL_AST_HPP_

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qdt::sql {

/// Owning, deep-copying, nullable pointer. Gives recursive AST nodes value
/// semantics so a rewrite can copy a tree and edit the copy.
template <class T>
class Box {
 public:
  Box() = default;
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT
  Box(const Box& other) : ptr_(other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr;
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  explicit operator bool() const { return ptr_ != nullptr; }
  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }
  T* get() { return ptr_.get(); }
  const T* get() const { return ptr_.get(); }

 private:
  std::unique_ptr<T> ptr_;
};

struct Expr;
struct SelectStatement;

struct Literal {
  enum class Kind { kInteger, kReal, kString, kBlob, kNull, kBoolean, kKeyword };
  Kind kind = Kind::kNull;
  // Source text for numbers/keywords, decoded contents for strings/blobs.
  std::string text;
};

struct ColumnRef {
  std::string qualifier;  // table name or alias; empty when unqualified
  std::string name;
  bool quoted_qualifier = false;
  bool quoted_name = false;
};

struct Unary {
  std::string op;  // "-", "+", "~", "NOT"
  Box<Expr> operand;
};

struct Binary {
  // Upper-case canonical operator: "AND", "OR", "=", "<>", "IS", "IS NOT",
  // "||", "+", "LIKE", "NOT GLOB", ...
  std::string op;
  Box<Expr> lhs;
  Box<Expr> rhs;
  Box<Expr> escape;  // LIKE ... ESCAPE only
};

struct Between {
  Box<Expr> operand;
  Box<Expr> low;
  Box<Expr> high;
  bool negated = false;
};

struct InList {
  Box<Expr> operand;
  std::vector<Expr> items;
  bool negated = false;
};

struct InSubquery {
  Box<Expr> operand;
  Box<SelectStatement> query;
  bool negated = false;
};

struct Exists {
  Box<SelectStatement> query;
};

struct ScalarSubquery {
  Box<SelectStatement> query;
};

struct FunctionCall {
  std::string name;  // as written
  bool distinct = false;
  bool star = false;  // COUNT(*)
  std::vector<Expr> args;
  Box<Expr> filter;     // FILTER (WHERE ...)
  bool windowed = false;  // OVER ...; the window itself is not retained
};

struct WhenClause;

struct Case {
  Box<Expr> operand;
  std::vector<WhenClause> whens;
  Box<Expr> otherwise;
};

struct Cast {
  Box<Expr> operand;
  std::string type_name;
};

struct Collate {
  Box<Expr> operand;
  std::string collation;
};

struct Expr {
  using Node = std::variant<Literal, ColumnRef, Unary, Binary, Between, InList,
                            InSubquery, Exists, ScalarSubquery, FunctionCall, Case,
                            Cast, Collate>;
  Node node;
  // Byte range of this expression in the text it was parsed from; both zero
  // for synthesized nodes.
  std::size_t begin = 0;
  std::size_t end = 0;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
  template <class T>
  T* as() { return std::get_if<T>(&node); }
};

struct WhenClause {
  Expr condition;
  Expr result;
};

struct SelectItem {
  Box<Expr> expr;            // null for wildcard items
  bool wildcard = false;     // * or qualifier.*
  std::string wildcard_qualifier;
  std::string alias;
  bool has_alias = false;
  bool quoted_alias = false;
  std::size_t begin = 0;
  std::size_t end = 0;  // end of the expression, excluding any alias
};

struct TableRef {
  // Either a named table or a parenthesized subquery.
  std::string schema;
  std::string name;
  bool quoted_name = false;
  Box<SelectStatement> subquery;
  std::string alias;
  bool quoted_alias = false;
  // Join operator introducing this item ("" for the first item, "," or the
  // upper-case join keywords otherwise) and its constraint.
  std::string join;
  Box<Expr> on;
  std::vector<std::string> using_columns;
  std::size_t begin = 0;
};

struct SelectCore {
  bool distinct = false;
  std::vector<SelectItem> items;
  std::vector<TableRef> from;
  Box<Expr> where;
  std::vector<Expr> group_by;
  Box<Expr> having;
  bool window_clause = false;
  std::size_t begin = 0;
};

struct OrderItem {
  Expr expr;
  std::string direction;  // "", "ASC", "DESC"
  std::string nulls;      // "", "NULLS FIRST", "NULLS LAST"
};

struct CompoundPart {
  std::string op;  // "UNION", "UNION ALL", "INTERSECT", "EXCEPT"
  SelectCore core;
  std::size_t begin = 0;
};

struct CommonTable {
  std::string name;
  std::vector<std::string> columns;
  Box<SelectStatement> query;
  std::size_t begin = 0;
};

/// One parsed SELECT statement, including any WITH prefix, compound arms,
/// ORDER BY and LIMIT.
struct SelectStatement {
  bool recursive = false;
  std::vector<CommonTable> ctes;
  std::size_t with_begin = 0;
  SelectCore core;
  std::vector<CompoundPart> compounds;
  std::vector<OrderItem> order_by;
  Box<Expr> limit;
  Box<Expr> offset;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Structural equality ignoring source positions; identifiers compare
/// case-insensitively and column qualifiers are ignored.
bool same_expr(const Expr& a, const Expr& b);

}  // namespace qdt::sql

#endif  // QDT_SQL_AST_HPP_
