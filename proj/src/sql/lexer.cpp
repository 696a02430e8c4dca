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

#include "qdt/sql/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace qdt::sql {
namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool ident_char(char c) {
  return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '$';
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

constexpr std::array<std::string_view, 15> kOperators = {
    "->>", "||", "<<", ">>", "<=", ">=", "==", "!=", "<>", "->",
    "<",   ">",  "=",  "&",  "|"};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  LexResult run() {
    LexResult out;
    while (true) {
      skip_trivia();
      if (error_) break;
      if (pos_ >= src_.size()) break;
      if (!next(out.tokens)) break;
    }
    out.tokens.push_back(Token{TokenKind::kEnd, "", "", src_.size()});
    out.error = error_;
    return out;
  }

 private:
  void fail(std::size_t at, std::string msg) {
    if (!error_) error_ = LexError{at, std::move(msg)};
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '-' && peek(1) == '-') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '/' && peek(1) == '*') {
        auto end = src_.find("*/", pos_ + 2);
        if (end == std::string_view::npos) {
          fail(pos_, "unterminated comment");
          pos_ = src_.size();
          return;
        }
        pos_ = end + 2;
      } else {
        return;
      }
    }
  }

  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void push(std::vector<Token>& toks, TokenKind kind, std::size_t start, std::string value) {
    toks.push_back(Token{kind, std::string(src_.substr(start, pos_ - start)), std::move(value), start});
  }

  // Reads a quoted run ending at `close`, where a doubled close char escapes.
  bool quoted(char close, std::string& value) {
    std::size_t start = pos_;
    ++pos_;
    while (pos_ < src_.size()) {
      if (src_[pos_] == close) {
        if (close != ']' && peek(1) == close) {
          value.push_back(close);
          pos_ += 2;
          continue;
        }
        ++pos_;
        return true;
      }
      value.push_back(src_[pos_++]);
    }
    fail(start, "unterminated quoted token");
    return false;
  }

  bool next(std::vector<Token>& toks) {
    const std::size_t start = pos_;
    const char c = src_[pos_];

    if ((c == 'x' || c == 'X') && peek(1) == '\'') {
      ++pos_;
      std::string value;
      if (!quoted('\'', value)) return false;
      push(toks, TokenKind::kBlob, start, value);
      return true;
    }
    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
      push(toks, TokenKind::kIdentifier, start, std::string(src_.substr(start, pos_ - start)));
      return true;
    }
    if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
      bool real = false;
      if (c == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
        pos_ += 2;
        while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
          real = true;
          ++pos_;
          while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
          std::size_t save = pos_;
          ++pos_;
          if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
          if (pos_ < src_.size() && is_digit(src_[pos_])) {
            real = true;
            while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
          } else {
            pos_ = save;
          }
        }
      }
      if (pos_ < src_.size() && ident_start(src_[pos_])) {
        fail(start, "malformed numeric literal");
        return false;
      }
      push(toks, real ? TokenKind::kReal : TokenKind::kInteger, start, "");
      return true;
    }
    for (auto op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        pos_ += op.size();
        push(toks, TokenKind::kOperator, start, std::string(op));
        return true;
      }
    }
    switch (c) {
      case '\'': {
        std::string value;
        if (!quoted('\'', value)) return false;
        push(toks, TokenKind::kString, start, value);
        return true;
      }
      case '"':
      case '`': {
        std::string value;
        if (!quoted(c, value)) return false;
        push(toks, TokenKind::kQuotedIdentifier, start, value);
        return true;
      }
      case '[': {
        std::string value;
        if (!quoted(']', value)) return false;
        push(toks, TokenKind::kQuotedIdentifier, start, value);
        return true;
      }
      case '?':
      case ':':
      case '@':
      case '$': {
        ++pos_;
        while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
        push(toks, TokenKind::kParameter, start, "");
        return true;
      }
      case '(': ++pos_; push(toks, TokenKind::kLParen, start, ""); return true;
      case ')': ++pos_; push(toks, TokenKind::kRParen, start, ""); return true;
      case ',': ++pos_; push(toks, TokenKind::kComma, start, ""); return true;
      case '.': ++pos_; push(toks, TokenKind::kDot, start, ""); return true;
      case ';': ++pos_; push(toks, TokenKind::kSemicolon, start, ""); return true;
      case '+': case '-': case '*': case '/': case '%': case '~':
        ++pos_;
        push(toks, TokenKind::kOperator, start, std::string(1, c));
        return true;
      default:
        break;
    }
    fail(start, std::string("unexpected character '") + c + "'");
    return false;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::optional<LexError> error_;
};

// Words that cannot start an implicit alias or serve as a bare column name.
constexpr std::string_view kReserved[] = {
    "ALL",       "ALTER",     "AND",       "AS",        "ASC",       "ATTACH",
    "BEGIN",     "BETWEEN",   "BY",        "CASE",      "CAST",      "COLLATE",
    "COMMIT",    "CREATE",    "CROSS",     "CURRENT_DATE", "CURRENT_TIME",
    "CURRENT_TIMESTAMP",      "DELETE",    "DESC",      "DETACH",    "DISTINCT",
    "DROP",      "ELSE",      "END",       "ESCAPE",    "EXCEPT",    "EXISTS",
    "FILTER",    "FROM",      "FULL",      "GLOB",      "GROUP",     "HAVING",
    "IN",        "INDEXED",   "INNER",     "INSERT",    "INTERSECT", "INTO",
    "IS",        "ISNULL",    "JOIN",      "LEFT",      "LIKE",      "LIMIT",
    "MATCH",     "NATURAL",   "NOT",       "NOTNULL",   "NULL",      "OFFSET",
    "ON",        "OR",        "ORDER",     "OUTER",     "OVER",      "PRAGMA",
    "REGEXP",    "RIGHT",     "ROLLBACK",  "SELECT",    "SET",       "THEN",
    "UNION",     "UPDATE",    "USING",     "VALUES",    "WHEN",      "WHERE",
    "WINDOW",    "WITH",      "VACUUM"};

}  // namespace

LexResult tokenize(std::string_view sql) { return Lexer(sql).run(); }

bool is_reserved_word(std::string_view upper) {
  return std::find(std::begin(kReserved), std::end(kReserved), upper) != std::end(kReserved);
}

std::vector<std::string> split_statements(std::string_view text) {
  LexResult lexed = tokenize(text);
  std::vector<std::string> out;
  std::size_t stmt_start = 0;
  bool has_content = false;
  std::size_t last_end = 0;
  const std::size_t limit = lexed.error ? lexed.error->offset : text.size();

  auto flush = [&](std::size_t end) {
    if (has_content) {
      std::string_view piece = text.substr(stmt_start, end - stmt_start);
      auto first = piece.find_first_not_of(" \t\r\n");
      auto last = piece.find_last_not_of(" \t\r\n");
      out.emplace_back(piece.substr(first, last - first + 1));
    }
    has_content = false;
  };

  for (const auto& tok : lexed.tokens) {
    if (tok.kind == TokenKind::kEnd) break;
    if (tok.kind == TokenKind::kSemicolon) {
      flush(last_end);
      stmt_start = tok.offset + 1;
      continue;
    }
    if (!has_content) stmt_start = tok.offset;
    has_content = true;
    last_end = tok.offset + tok.text.size();
  }
  if (lexed.error) {
    // Keep everything from the current statement start through end of text.
    std::size_t from = has_content ? stmt_start : lexed.error->offset;
    std::string_view rest = text.substr(std::min(from, limit));
    auto first = rest.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos) {
      auto last = rest.find_last_not_of(" \t\r\n");
      out.emplace_back(rest.substr(first, last - first + 1));
    }
  } else {
    flush(last_end);
  }
  return out;
}

}  // namespace qdt::sql
