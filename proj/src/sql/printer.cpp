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

#include "qdt/sql/printer.hpp"

#include <cctype>

#include "qdt/schema.hpp"
#include "qdt/sql/lexer.hpp"

namespace qdt::sql {
namespace {

enum Prec : int {
  kOr = 1,
  kAnd = 2,
  kNot = 3,
  kEquality = 4,
  kCompare = 5,
  kBitwise = 6,
  kAdditive = 7,
  kMultiplicative = 8,
  kConcat = 9,
  kCollatePrec = 10,
  kUnary = 11,
  kPrimary = 12,
};

int binary_prec(const std::string& op) {
  if (op == "OR") return kOr;
  if (op == "AND") return kAnd;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return kCompare;
  if (op == "<<" || op == ">>" || op == "&" || op == "|") return kBitwise;
  if (op == "+" || op == "-") return kAdditive;
  if (op == "*" || op == "/" || op == "%") return kMultiplicative;
  if (op == "||") return kConcat;
  return kEquality;  // =, <>, IS, IS NOT, LIKE, GLOB, ...
}

int prec_of(const Expr& e) {
  if (const auto* b = e.as<Binary>()) return binary_prec(b->op);
  if (const auto* u = e.as<Unary>()) return u->op == "NOT" ? kNot : kUnary;
  if (e.as<Between>() || e.as<InList>() || e.as<InSubquery>()) return kEquality;
  if (e.as<Collate>()) return kCollatePrec;
  return kPrimary;
}

class Printer {
 public:
  std::string out;

  void statement(const SelectStatement& s) {
    if (!s.ctes.empty()) {
      out += s.recursive ? "WITH RECURSIVE " : "WITH ";
      for (std::size_t i = 0; i < s.ctes.size(); ++i) {
        if (i) out += ", ";
        const auto& cte = s.ctes[i];
        out += quote_identifier(cte.name);
        if (!cte.columns.empty()) {
          out += '(';
          for (std::size_t j = 0; j < cte.columns.size(); ++j) {
            if (j) out += ", ";
            out += quote_identifier(cte.columns[j]);
          }
          out += ')';
        }
        out += " AS (";
        statement(*cte.query);
        out += ')';
      }
      out += ' ';
    }
    core(s.core);
    for (const auto& part : s.compounds) {
      out += ' ';
      out += part.op;
      out += ' ';
      core(part.core);
    }
    if (!s.order_by.empty()) {
      out += " ORDER BY ";
      for (std::size_t i = 0; i < s.order_by.size(); ++i) {
        if (i) out += ", ";
        expr(s.order_by[i].expr, 0);
        if (!s.order_by[i].direction.empty()) out += " " + s.order_by[i].direction;
        if (!s.order_by[i].nulls.empty()) out += " " + s.order_by[i].nulls;
      }
    }
    if (s.limit) {
      out += " LIMIT ";
      expr(*s.limit, 0);
    }
    if (s.offset) {
      if (!s.limit) out += " LIMIT -1";
      out += " OFFSET ";
      expr(*s.offset, 0);
    }
  }

  void core(const SelectCore& c) {
    out += "SELECT ";
    if (c.distinct) out += "DISTINCT ";
    for (std::size_t i = 0; i < c.items.size(); ++i) {
      if (i) out += ", ";
      const auto& item = c.items[i];
      if (item.wildcard) {
        if (!item.wildcard_qualifier.empty()) out += quote_identifier(item.wildcard_qualifier) + ".";
        out += '*';
        continue;
      }
      expr(*item.expr, 0);
      if (item.has_alias) {
        out += " AS ";
        out += item.quoted_alias ? quote_always(item.alias) : quote_identifier(item.alias);
      }
    }
    if (!c.from.empty()) {
      out += " FROM ";
      for (const auto& ref : c.from) table_ref(ref);
    }
    if (c.where) {
      out += " WHERE ";
      expr(*c.where, 0);
    }
    if (!c.group_by.empty()) {
      out += " GROUP BY ";
      for (std::size_t i = 0; i < c.group_by.size(); ++i) {
        if (i) out += ", ";
        expr(c.group_by[i], 0);
      }
    }
    if (c.having) {
      out += " HAVING ";
      expr(*c.having, 0);
    }
  }

  void table_ref(const TableRef& ref) {
    if (ref.join == ",") {
      out += ", ";
    } else if (!ref.join.empty()) {
      out += ' ' + ref.join + ' ';
    }
    if (ref.subquery) {
      out += '(';
      statement(*ref.subquery);
      out += ')';
    } else {
      if (!ref.schema.empty()) out += quote_identifier(ref.schema) + ".";
      out += ref.quoted_name ? quote_always(ref.name) : quote_identifier(ref.name);
    }
    if (!ref.alias.empty()) {
      out += " AS ";
      out += ref.quoted_alias ? quote_always(ref.alias) : quote_identifier(ref.alias);
    }
    if (ref.on) {
      out += " ON ";
      expr(*ref.on, 0);
    }
    if (!ref.using_columns.empty()) {
      out += " USING (";
      for (std::size_t i = 0; i < ref.using_columns.size(); ++i) {
        if (i) out += ", ";
        out += quote_identifier(ref.using_columns[i]);
      }
      out += ')';
    }
  }

  static std::string quote_always(std::string_view name) {
    std::string q = "\"";
    for (char c : name) {
      if (c == '"') q += '"';
      q += c;
    }
    q += '"';
    return q;
  }

  void expr(const Expr& e, int min_prec) {
    const bool paren = prec_of(e) < min_prec;
    if (paren) out += '(';
    node(e);
    if (paren) out += ')';
  }

  void subquery(const SelectStatement& s) {
    out += '(';
    statement(s);
    out += ')';
  }

  void node(const Expr& e) {
    if (const auto* lit = e.as<Literal>()) return literal(*lit);
    if (const auto* col = e.as<ColumnRef>()) {
      if (!col->qualifier.empty()) {
        out += col->quoted_qualifier ? quote_always(col->qualifier) : quote_identifier(col->qualifier);
        out += '.';
      }
      out += col->quoted_name ? quote_always(col->name) : quote_identifier(col->name);
      return;
    }
    if (const auto* u = e.as<Unary>()) {
      if (u->op == "NOT") {
        out += "NOT ";
        expr(*u->operand, kNot);
        return;
      }
      out += u->op;
      std::size_t mark = out.size();
      expr(*u->operand, kUnary);
      // "- -1" must not collapse into a "--" comment.
      if (out.size() > mark && (out[mark] == '-' || out[mark] == '+')) out.insert(mark, " ");
      return;
    }
    if (const auto* b = e.as<Binary>()) {
      const int p = binary_prec(b->op);
      expr(*b->lhs, p);
      out += ' ' + b->op + ' ';
      expr(*b->rhs, p + 1);
      if (b->escape) {
        out += " ESCAPE ";
        expr(*b->escape, p + 1);
      }
      return;
    }
    if (const auto* bt = e.as<Between>()) {
      expr(*bt->operand, kCompare);
      out += bt->negated ? " NOT BETWEEN " : " BETWEEN ";
      expr(*bt->low, kCompare);
      out += " AND ";
      expr(*bt->high, kCompare);
      return;
    }
    if (const auto* in = e.as<InList>()) {
      expr(*in->operand, kCompare);
      out += in->negated ? " NOT IN (" : " IN (";
      for (std::size_t i = 0; i < in->items.size(); ++i) {
        if (i) out += ", ";
        expr(in->items[i], 0);
      }
      out += ')';
      return;
    }
    if (const auto* in = e.as<InSubquery>()) {
      expr(*in->operand, kCompare);
      out += in->negated ? " NOT IN " : " IN ";
      subquery(*in->query);
      return;
    }
    if (const auto* ex = e.as<Exists>()) {
      out += "EXISTS ";
      subquery(*ex->query);
      return;
    }
    if (const auto* sq = e.as<ScalarSubquery>()) return subquery(*sq->query);
    if (const auto* f = e.as<FunctionCall>()) {
      out += f->name;
      out += '(';
      if (f->star) {
        out += '*';
      } else {
        if (f->distinct) out += "DISTINCT ";
        for (std::size_t i = 0; i < f->args.size(); ++i) {
          if (i) out += ", ";
          expr(f->args[i], 0);
        }
      }
      out += ')';
      if (f->filter) {
        out += " FILTER (WHERE ";
        expr(*f->filter, 0);
        out += ')';
      }
      // Windowed calls never reach the printer; they are rejected upstream.
      if (f->windowed) out += " OVER ()";
      return;
    }
    if (const auto* c = e.as<Case>()) {
      out += "CASE";
      if (c->operand) {
        out += ' ';
        expr(*c->operand, 0);
      }
      for (const auto& w : c->whens) {
        out += " WHEN ";
        expr(w.condition, 0);
        out += " THEN ";
        expr(w.result, 0);
      }
      if (c->otherwise) {
        out += " ELSE ";
        expr(*c->otherwise, 0);
      }
      out += " END";
      return;
    }
    if (const auto* c = e.as<Cast>()) {
      out += "CAST(";
      expr(*c->operand, 0);
      out += " AS " + c->type_name + ")";
      return;
    }
    if (const auto* c = e.as<Collate>()) {
      expr(*c->operand, kCollatePrec);
      out += " COLLATE " + quote_identifier(c->collation);
      return;
    }
  }

  void literal(const Literal& lit) {
    switch (lit.kind) {
      case Literal::Kind::kString: out += quote_string(lit.text); break;
      case Literal::Kind::kBlob: out += "X'" + lit.text + "'"; break;
      case Literal::Kind::kNull: out += "NULL"; break;
      default: out += lit.text; break;
    }
  }
};

bool plain_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

}  // namespace

std::string quote_identifier(std::string_view name) {
  if (plain_identifier(name) && !is_reserved_word(to_upper(name))) return std::string(name);
  std::string q = "\"";
  for (char c : name) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

std::string quote_string(std::string_view value) {
  std::string q = "'";
  for (char c : value) {
    if (c == '\'') q += '\'';
    q += c;
  }
  q += '\'';
  return q;
}

std::string to_sql(const SelectStatement& stmt) {
  Printer p;
  p.statement(stmt);
  return std::move(p.out);
}

std::string to_sql(const Expr& expr) {
  Printer p;
  p.expr(expr, 0);
  return std::move(p.out);
}

}  // namespace qdt::sql
