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

#include "qdt/sql/parser.hpp"

#include <algorithm>
#include <initializer_list>

#include "qdt/schema.hpp"
#include "qdt/sql/lexer.hpp"

namespace qdt::sql {
namespace {

// Leading words of statement kinds other than SELECT.
constexpr std::string_view kStatementWords[] = {
    "INSERT", "UPDATE", "DELETE", "REPLACE", "UPSERT", "MERGE",   "CREATE",
    "DROP",   "ALTER",  "TRUNCATE", "BEGIN", "COMMIT", "END",     "ROLLBACK",
    "SAVEPOINT", "RELEASE", "PRAGMA", "ATTACH", "DETACH", "VACUUM", "ANALYZE",
    "REINDEX", "EXPLAIN", "VALUES", "GRANT", "REVOKE", "SET", "SHOW",
    "DESCRIBE", "USE", "CALL", "EXEC", "EXECUTE", "COPY", "LOAD"};

bool is_statement_word(const Token& t) {
  if (t.kind != TokenKind::kIdentifier) return false;
  std::string upper = to_upper(t.text);
  return std::find(std::begin(kStatementWords), std::end(kStatementWords), upper) !=
         std::end(kStatementWords);
}

struct Failure {
  ParseErrorKind kind;
  std::size_t offset;
  std::string message;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  SelectStatement run() {
    SelectStatement stmt = statement();
    if (!at(TokenKind::kEnd)) fail_here("end of statement");
    return stmt;
  }

 private:
  // --- token helpers ------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t n = 1) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  bool at(TokenKind k) const { return cur().kind == k; }
  static bool is_kw(const Token& t, std::string_view upper) {
    return t.kind == TokenKind::kIdentifier && iequals(t.text, upper);
  }
  bool at_kw(std::string_view upper) const { return is_kw(cur(), upper); }
  bool at_op(std::string_view op) const {
    return cur().kind == TokenKind::kOperator && cur().value == op;
  }

  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    last_end_ = t.offset + t.text.size();
    return t;
  }

  bool accept(TokenKind k) {
    if (!at(k)) return false;
    advance();
    return true;
  }
  bool accept_kw(std::string_view upper) {
    if (!at_kw(upper)) return false;
    advance();
    return true;
  }
  bool accept_op(std::string_view op) {
    if (!at_op(op)) return false;
    advance();
    return true;
  }
  void expect(TokenKind k, std::string_view what) {
    if (!accept(k)) fail_here(what);
  }
  void expect_kw(std::string_view upper) {
    if (!accept_kw(upper)) fail_here(upper);
  }

  [[noreturn]] void fail(std::size_t offset, std::string message,
                         ParseErrorKind kind = ParseErrorKind::kSyntax) const {
    throw Failure{kind, offset, std::move(message)};
  }

  [[noreturn]] void fail_here(std::string_view expected) const {
    const Token& t = cur();
    std::string found = t.kind == TokenKind::kEnd ? "end of input" : "'" + t.text + "'";
    fail(t.offset, "expected " + std::string(expected) + " but found " + found);
  }

  bool at_name() const {
    if (at(TokenKind::kQuotedIdentifier)) return true;
    return at(TokenKind::kIdentifier) && !is_reserved_word(to_upper(cur().text));
  }

  // Reads an identifier; returns its name and whether it was quoted.
  std::pair<std::string, bool> name(std::string_view what) {
    if (at(TokenKind::kQuotedIdentifier)) return {advance().value, true};
    if (at_name()) return {advance().text, false};
    fail_here(what);
  }

  bool at_select_start() const { return at_kw("SELECT") || at_kw("WITH") || at_kw("VALUES"); }

  void skip_balanced_parens() {
    expect(TokenKind::kLParen, "'('");
    int depth = 1;
    while (depth > 0) {
      if (at(TokenKind::kEnd)) fail_here("')'");
      if (at(TokenKind::kLParen)) ++depth;
      if (at(TokenKind::kRParen)) --depth;
      advance();
    }
  }

  // --- statements ---------------------------------------------------------

  SelectStatement statement() {
    SelectStatement s;
    s.begin = cur().offset;
    if (at_kw("WITH")) {
      s.with_begin = cur().offset;
      advance();
      s.recursive = accept_kw("RECURSIVE");
      do {
        s.ctes.push_back(common_table());
      } while (accept(TokenKind::kComma));
      if (is_statement_word(cur()) && !at_kw("VALUES")) {
        fail(cur().offset, "statement kind " + to_upper(cur().text) + " is not permitted",
             ParseErrorKind::kForbiddenStatement);
      }
    }
    s.core = core();
    while (true) {
      std::string op;
      std::size_t begin = cur().offset;
      if (accept_kw("UNION")) {
        op = accept_kw("ALL") ? "UNION ALL" : "UNION";
      } else if (accept_kw("INTERSECT")) {
        op = "INTERSECT";
      } else if (accept_kw("EXCEPT")) {
        op = "EXCEPT";
      } else {
        break;
      }
      s.compounds.push_back(CompoundPart{op, core(), begin});
    }
    if (accept_kw("ORDER")) {
      expect_kw("BY");
      do {
        OrderItem item{expr(), "", ""};
        if (accept_kw("COLLATE")) {
          auto [coll, quoted] = name("collation name");
          (void)quoted;
          Expr wrapped{Collate{std::move(item.expr), coll}, item.expr.begin, last_end_};
          item.expr = std::move(wrapped);
        }
        if (accept_kw("ASC")) item.direction = "ASC";
        else if (accept_kw("DESC")) item.direction = "DESC";
        if (accept_kw("NULLS")) {
          if (accept_kw("FIRST")) item.nulls = "NULLS FIRST";
          else if (accept_kw("LAST")) item.nulls = "NULLS LAST";
          else fail_here("FIRST or LAST");
        }
        s.order_by.push_back(std::move(item));
      } while (accept(TokenKind::kComma));
    }
    if (accept_kw("LIMIT")) {
      Expr first = expr();
      if (accept_kw("OFFSET")) {
        s.limit = std::move(first);
        s.offset = expr();
      } else if (accept(TokenKind::kComma)) {
        // LIMIT <offset>, <count>
        s.offset = std::move(first);
        s.limit = expr();
      } else {
        s.limit = std::move(first);
      }
    }
    s.end = last_end_;
    return s;
  }

  CommonTable common_table() {
    CommonTable cte;
    cte.begin = cur().offset;
    cte.name = name("common table name").first;
    if (accept(TokenKind::kLParen)) {
      do {
        cte.columns.push_back(name("column name").first);
      } while (accept(TokenKind::kComma));
      expect(TokenKind::kRParen, "')'");
    }
    expect_kw("AS");
    if (accept_kw("NOT")) expect_kw("MATERIALIZED");
    else accept_kw("MATERIALIZED");
    expect(TokenKind::kLParen, "'('");
    cte.query = statement();
    expect(TokenKind::kRParen, "')'");
    return cte;
  }

  SelectCore core() {
    SelectCore c;
    c.begin = cur().offset;
    if (at_kw("VALUES")) fail(cur().offset, "VALUES lists are not supported");
    expect_kw("SELECT");
    if (accept_kw("DISTINCT")) c.distinct = true;
    else accept_kw("ALL");
    do {
      c.items.push_back(select_item());
    } while (accept(TokenKind::kComma));
    if (accept_kw("FROM")) from_clause(c);
    if (accept_kw("WHERE")) c.where = expr();
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      do {
        c.group_by.push_back(expr());
      } while (accept(TokenKind::kComma));
    }
    if (accept_kw("HAVING")) c.having = expr();
    if (accept_kw("WINDOW")) {
      c.window_clause = true;
      do {
        name("window name");
        expect_kw("AS");
        skip_balanced_parens();
      } while (accept(TokenKind::kComma));
    }
    return c;
  }

  SelectItem select_item() {
    SelectItem item;
    item.begin = cur().offset;
    if (accept_op("*")) {
      item.wildcard = true;
      item.end = last_end_;
      return item;
    }
    if ((at(TokenKind::kIdentifier) || at(TokenKind::kQuotedIdentifier)) &&
        peek().kind == TokenKind::kDot && peek(2).kind == TokenKind::kOperator &&
        peek(2).value == "*") {
      item.wildcard = true;
      item.wildcard_qualifier = at(TokenKind::kQuotedIdentifier) ? cur().value : cur().text;
      advance();
      advance();
      advance();
      item.end = last_end_;
      return item;
    }
    item.expr = expr();
    item.end = last_end_;
    if (accept_kw("AS")) {
      if (at(TokenKind::kString)) {
        item.alias = advance().value;
        item.quoted_alias = true;
      } else {
        auto [n, quoted] = name("alias");
        item.alias = n;
        item.quoted_alias = quoted;
      }
      item.has_alias = true;
    } else if (at_name() || at(TokenKind::kString)) {
      bool quoted = !at(TokenKind::kIdentifier);
      item.alias = at(TokenKind::kIdentifier) ? cur().text : cur().value;
      item.quoted_alias = quoted;
      item.has_alias = true;
      advance();
    }
    return item;
  }

  void from_clause(SelectCore& c) {
    c.from.push_back(table_ref(""));
    while (true) {
      std::string join;
      if (accept(TokenKind::kComma)) {
        join = ",";
      } else {
        std::vector<std::string> words;
        std::size_t save = pos_;
        if (accept_kw("NATURAL")) words.emplace_back("NATURAL");
        if (accept_kw("LEFT")) {
          words.emplace_back("LEFT");
          if (accept_kw("OUTER")) words.emplace_back("OUTER");
        } else if (accept_kw("RIGHT")) {
          words.emplace_back("RIGHT");
          if (accept_kw("OUTER")) words.emplace_back("OUTER");
        } else if (accept_kw("FULL")) {
          words.emplace_back("FULL");
          if (accept_kw("OUTER")) words.emplace_back("OUTER");
        } else if (accept_kw("INNER")) {
          words.emplace_back("INNER");
        } else if (accept_kw("CROSS")) {
          words.emplace_back("CROSS");
        }
        if (!accept_kw("JOIN")) {
          if (!words.empty()) fail_here("JOIN");
          pos_ = save;
          break;
        }
        words.emplace_back("JOIN");
        for (std::size_t i = 0; i < words.size(); ++i) {
          if (i) join += ' ';
          join += words[i];
        }
      }
      TableRef ref = table_ref(join);
      if (join != ",") {
        if (accept_kw("ON")) {
          ref.on = expr();
        } else if (accept_kw("USING")) {
          expect(TokenKind::kLParen, "'('");
          do {
            ref.using_columns.push_back(name("column name").first);
          } while (accept(TokenKind::kComma));
          expect(TokenKind::kRParen, "')'");
        }
      }
      c.from.push_back(std::move(ref));
    }
  }

  TableRef table_ref(std::string join) {
    TableRef ref;
    ref.join = std::move(join);
    ref.begin = cur().offset;
    if (accept(TokenKind::kLParen)) {
      if (!at_select_start()) fail(cur().offset, "parenthesized join lists are not supported");
      ref.subquery = statement();
      expect(TokenKind::kRParen, "')'");
    } else {
      auto [first, quoted] = name("table name");
      if (accept(TokenKind::kDot)) {
        ref.schema = first;
        auto [second, q2] = name("table name");
        ref.name = second;
        ref.quoted_name = q2;
      } else {
        ref.name = first;
        ref.quoted_name = quoted;
      }
      if (at(TokenKind::kLParen)) fail(cur().offset, "table-valued functions are not supported");
    }
    if (accept_kw("AS")) {
      auto [alias, quoted] = name("alias");
      ref.alias = alias;
      ref.quoted_alias = quoted;
    } else if (at_name()) {
      ref.alias = at(TokenKind::kIdentifier) ? cur().text : cur().value;
      ref.quoted_alias = at(TokenKind::kQuotedIdentifier);
      advance();
    }
    if (accept_kw("INDEXED")) {
      expect_kw("BY");
      name("index name");
    } else if (at_kw("NOT") && is_kw(peek(), "INDEXED")) {
      advance();
      advance();
    }
    return ref;
  }

  // --- expressions --------------------------------------------------------

  Expr make(Expr::Node node, std::size_t begin) { return Expr{std::move(node), begin, last_end_}; }

  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (at_kw("OR")) {
      std::size_t begin = lhs.begin;
      advance();
      Expr rhs = and_expr();
      lhs = make(Binary{"OR", std::move(lhs), std::move(rhs), {}}, begin);
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = not_expr();
    while (at_kw("AND")) {
      std::size_t begin = lhs.begin;
      advance();
      Expr rhs = not_expr();
      lhs = make(Binary{"AND", std::move(lhs), std::move(rhs), {}}, begin);
    }
    return lhs;
  }

  Expr not_expr() {
    if (at_kw("NOT")) {
      std::size_t begin = cur().offset;
      advance();
      Expr operand = not_expr();
      return make(Unary{"NOT", std::move(operand)}, begin);
    }
    return equality_expr();
  }

  static bool is_pattern_word(const Token& t) {
    return is_kw(t, "LIKE") || is_kw(t, "GLOB") || is_kw(t, "MATCH") || is_kw(t, "REGEXP");
  }

  Expr equality_expr() {
    Expr lhs = compare_expr();
    while (true) {
      const std::size_t begin = lhs.begin;
      if (at_op("=") || at_op("==") || at_op("!=") || at_op("<>")) {
        std::string op = advance().value;
        if (op == "==") op = "=";
        if (op == "!=") op = "<>";
        Expr rhs = compare_expr();
        lhs = make(Binary{op, std::move(lhs), std::move(rhs), {}}, begin);
        continue;
      }
      if (at_kw("IS")) {
        advance();
        std::string op = accept_kw("NOT") ? "IS NOT" : "IS";
        if (at_kw("DISTINCT")) fail(cur().offset, "IS DISTINCT FROM is not supported");
        Expr rhs = compare_expr();
        lhs = make(Binary{op, std::move(lhs), std::move(rhs), {}}, begin);
        continue;
      }
      if (at_kw("ISNULL") || at_kw("NOTNULL")) {
        std::string op = at_kw("ISNULL") ? "IS" : "IS NOT";
        std::size_t null_at = cur().offset;
        advance();
        Expr null_lit{Literal{Literal::Kind::kNull, "NULL"}, null_at, last_end_};
        lhs = make(Binary{op, std::move(lhs), std::move(null_lit), {}}, begin);
        continue;
      }
      bool negated = false;
      if (at_kw("NOT")) {
        const Token& next = peek();
        if (is_kw(next, "NULL")) {
          advance();
          std::size_t null_at = cur().offset;
          advance();
          Expr null_lit{Literal{Literal::Kind::kNull, "NULL"}, null_at, last_end_};
          lhs = make(Binary{"IS NOT", std::move(lhs), std::move(null_lit), {}}, begin);
          continue;
        }
        if (!(is_kw(next, "IN") || is_kw(next, "BETWEEN") || is_pattern_word(next))) break;
        advance();
        negated = true;
      }
      if (accept_kw("IN")) {
        lhs = in_rest(std::move(lhs), negated, begin);
        continue;
      }
      if (accept_kw("BETWEEN")) {
        Expr low = compare_expr();
        expect_kw("AND");
        Expr high = compare_expr();
        lhs = make(Between{std::move(lhs), std::move(low), std::move(high), negated}, begin);
        continue;
      }
      if (is_pattern_word(cur())) {
        std::string op = to_upper(advance().text);
        if (negated) op = "NOT " + op;
        Expr rhs = compare_expr();
        Binary b{op, std::move(lhs), std::move(rhs), {}};
        if (accept_kw("ESCAPE")) b.escape = compare_expr();
        lhs = make(std::move(b), begin);
        continue;
      }
      if (negated) fail_here("IN, BETWEEN, LIKE or GLOB");
      break;
    }
    return lhs;
  }

  Expr in_rest(Expr lhs, bool negated, std::size_t begin) {
    if (!at(TokenKind::kLParen)) fail(cur().offset, "IN requires a parenthesized list or subquery");
    advance();
    if (at_select_start()) {
      SelectStatement q = statement();
      expect(TokenKind::kRParen, "')'");
      return make(InSubquery{std::move(lhs), std::move(q), negated}, begin);
    }
    InList list{std::move(lhs), {}, negated};
    if (!at(TokenKind::kRParen)) {
      do {
        list.items.push_back(expr());
      } while (accept(TokenKind::kComma));
    }
    expect(TokenKind::kRParen, "')'");
    return make(std::move(list), begin);
  }

  template <class Next>
  Expr binary_level(std::initializer_list<std::string_view> ops, Next next) {
    Expr lhs = (this->*next)();
    while (cur().kind == TokenKind::kOperator &&
           std::find(ops.begin(), ops.end(), cur().value) != ops.end()) {
      std::size_t begin = lhs.begin;
      std::string op = advance().value;
      Expr rhs = (this->*next)();
      lhs = make(Binary{op, std::move(lhs), std::move(rhs), {}}, begin);
    }
    return lhs;
  }

  Expr compare_expr() { return binary_level({"<", "<=", ">", ">="}, &Parser::bitwise_expr); }
  Expr bitwise_expr() { return binary_level({"<<", ">>", "&", "|"}, &Parser::additive_expr); }
  Expr additive_expr() { return binary_level({"+", "-"}, &Parser::multiplicative_expr); }
  Expr multiplicative_expr() { return binary_level({"*", "/", "%"}, &Parser::concat_expr); }

  Expr concat_expr() {
    if (at_op("->") || at_op("->>")) fail(cur().offset, "JSON operators are not supported");
    Expr lhs = collate_expr();
    while (true) {
      if (at_op("->") || at_op("->>")) fail(cur().offset, "JSON operators are not supported");
      if (!at_op("||")) break;
      std::size_t begin = lhs.begin;
      advance();
      Expr rhs = collate_expr();
      lhs = make(Binary{"||", std::move(lhs), std::move(rhs), {}}, begin);
    }
    return lhs;
  }

  Expr collate_expr() {
    Expr e = unary_expr();
    while (at_kw("COLLATE")) {
      std::size_t begin = e.begin;
      advance();
      auto [coll, quoted] = name("collation name");
      (void)quoted;
      e = make(Collate{std::move(e), coll}, begin);
    }
    return e;
  }

  Expr unary_expr() {
    if (at_op("-") || at_op("+") || at_op("~")) {
      std::size_t begin = cur().offset;
      std::string op = advance().value;
      Expr operand = unary_expr();
      return make(Unary{op, std::move(operand)}, begin);
    }
    return primary();
  }

  Expr primary() {
    const Token& t = cur();
    const std::size_t begin = t.offset;
    switch (t.kind) {
      case TokenKind::kInteger:
        advance();
        return make(Literal{Literal::Kind::kInteger, t.text}, begin);
      case TokenKind::kReal:
        advance();
        return make(Literal{Literal::Kind::kReal, t.text}, begin);
      case TokenKind::kString: {
        std::string value = t.value;
        advance();
        return make(Literal{Literal::Kind::kString, std::move(value)}, begin);
      }
      case TokenKind::kBlob: {
        std::string value = t.value;
        advance();
        return make(Literal{Literal::Kind::kBlob, std::move(value)}, begin);
      }
      case TokenKind::kParameter:
        fail(t.offset, "bound parameters are not supported");
      case TokenKind::kLParen: {
        advance();
        if (at_select_start()) {
          SelectStatement q = statement();
          expect(TokenKind::kRParen, "')'");
          return make(ScalarSubquery{std::move(q)}, begin);
        }
        Expr inner = expr();
        if (at(TokenKind::kComma)) fail(cur().offset, "row values are not supported");
        expect(TokenKind::kRParen, "')'");
        inner.begin = begin;
        inner.end = last_end_;
        return inner;
      }
      case TokenKind::kIdentifier:
      case TokenKind::kQuotedIdentifier:
        return identifier_expr();
      default:
        fail_here("expression");
    }
  }

  Expr identifier_expr() {
    const Token& t = cur();
    const std::size_t begin = t.offset;
    if (t.kind == TokenKind::kIdentifier) {
      const std::string upper = to_upper(t.text);
      if (upper == "NULL") {
        advance();
        return make(Literal{Literal::Kind::kNull, "NULL"}, begin);
      }
      if ((upper == "TRUE" || upper == "FALSE") && peek().kind != TokenKind::kLParen) {
        advance();
        return make(Literal{Literal::Kind::kBoolean, upper}, begin);
      }
      if (upper == "CURRENT_DATE" || upper == "CURRENT_TIME" || upper == "CURRENT_TIMESTAMP") {
        advance();
        return make(Literal{Literal::Kind::kKeyword, upper}, begin);
      }
      if (upper == "CASE") return case_expr();
      if (upper == "CAST") return cast_expr();
      if (upper == "EXISTS") {
        advance();
        expect(TokenKind::kLParen, "'('");
        if (!at_select_start()) fail_here("SELECT");
        SelectStatement q = statement();
        expect(TokenKind::kRParen, "')'");
        return make(Exists{std::move(q)}, begin);
      }
      if (upper == "RAISE") fail(t.offset, "RAISE is not supported");
      if (peek().kind == TokenKind::kLParen &&
          (!is_reserved_word(upper) || upper == "LIKE" || upper == "GLOB")) {
        return function_call();
      }
      if (is_reserved_word(upper)) fail_here("expression");
    }

    auto [first, first_quoted] = name("column name");
    if (at(TokenKind::kDot)) {
      advance();
      if (at_op("*")) fail(cur().offset, "wildcards are only allowed as projection items");
      auto [second, second_quoted] = name("column name");
      if (at(TokenKind::kDot)) {
        // schema.table.column
        advance();
        auto [third, third_quoted] = name("column name");
        return make(ColumnRef{second, third, second_quoted, third_quoted}, begin);
      }
      return make(ColumnRef{first, second, first_quoted, second_quoted}, begin);
    }
    return make(ColumnRef{"", first, false, first_quoted}, begin);
  }

  Expr function_call() {
    const std::size_t begin = cur().offset;
    FunctionCall call;
    call.name = advance().text;
    expect(TokenKind::kLParen, "'('");
    if (accept_op("*")) {
      call.star = true;
    } else if (!at(TokenKind::kRParen)) {
      if (accept_kw("DISTINCT")) call.distinct = true;
      else accept_kw("ALL");
      do {
        call.args.push_back(expr());
      } while (accept(TokenKind::kComma));
    }
    expect(TokenKind::kRParen, "')'");
    if (accept_kw("FILTER")) {
      expect(TokenKind::kLParen, "'('");
      expect_kw("WHERE");
      call.filter = expr();
      expect(TokenKind::kRParen, "')'");
    }
    if (accept_kw("OVER")) {
      call.windowed = true;
      if (at(TokenKind::kLParen)) skip_balanced_parens();
      else name("window name");
    }
    return make(std::move(call), begin);
  }

  Expr case_expr() {
    const std::size_t begin = cur().offset;
    advance();
    Case c;
    if (!at_kw("WHEN")) c.operand = expr();
    while (accept_kw("WHEN")) {
      Expr cond = expr();
      expect_kw("THEN");
      Expr result = expr();
      c.whens.push_back(WhenClause{std::move(cond), std::move(result)});
    }
    if (c.whens.empty()) fail_here("WHEN");
    if (accept_kw("ELSE")) c.otherwise = expr();
    expect_kw("END");
    return make(std::move(c), begin);
  }

  Expr cast_expr() {
    const std::size_t begin = cur().offset;
    advance();
    expect(TokenKind::kLParen, "'('");
    Expr operand = expr();
    expect_kw("AS");
    std::string type;
    while (at(TokenKind::kIdentifier) || at(TokenKind::kLParen)) {
      if (at(TokenKind::kLParen)) {
        // type arguments, e.g. DECIMAL(10, 2)
        std::size_t start = cur().offset;
        skip_balanced_parens();
        (void)start;
        type += "(...)";
        continue;
      }
      if (!type.empty()) type += ' ';
      type += to_upper(advance().text);
    }
    if (type.empty()) fail_here("type name");
    expect(TokenKind::kRParen, "')'");
    return make(Cast{std::move(operand), std::move(type)}, begin);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
};

}  // namespace

ParseResult parse_select(std::string_view text) {
  ParseResult result;
  LexResult lexed = tokenize(text);
  if (lexed.error) {
    result.errors.push_back({ParseErrorKind::kSyntax, lexed.error->offset, lexed.error->message});
    return result;
  }

  // Group tokens into statements at top-level semicolons.
  std::vector<std::vector<Token>> statements;
  std::vector<Token> current;
  for (auto& tok : lexed.tokens) {
    if (tok.kind == TokenKind::kSemicolon || tok.kind == TokenKind::kEnd) {
      if (!current.empty()) {
        current.push_back(Token{TokenKind::kEnd, "", "", tok.offset});
        statements.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    current.push_back(tok);
  }

  if (statements.empty()) {
    result.errors.push_back({ParseErrorKind::kSyntax, 0, "empty query"});
    return result;
  }
  if (statements.size() > 1) {
    result.errors.push_back({ParseErrorKind::kMultiStatement, statements[1].front().offset,
                             "only one statement per query is allowed, found " +
                                 std::to_string(statements.size())});
    for (const auto& st : statements) {
      const Token& head = st.front();
      if (is_statement_word(head)) {
        result.errors.push_back({ParseErrorKind::kForbiddenStatement, head.offset,
                                 "statement kind " + to_upper(head.text) + " is not permitted"});
      }
    }
    return result;
  }

  const Token& head = statements.front().front();
  if (is_statement_word(head)) {
    result.errors.push_back({ParseErrorKind::kForbiddenStatement, head.offset,
                             "statement kind " + to_upper(head.text) +
                                 " is not permitted; only SELECT queries are accepted"});
    return result;
  }
  try {
    result.statement = Parser(std::move(statements.front())).run();
  } catch (const Failure& f) {
    result.errors.push_back({f.kind, f.offset, f.message});
  }
  return result;
}

}  // namespace qdt::sql
