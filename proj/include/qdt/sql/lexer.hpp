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

#ifndef QDT_SQL_LEXER_HPP_
#define QDT_SQL_LEXER_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qdt::sql {

enum class TokenKind {
  kIdentifier,        // bare word; may be a keyword
  kQuotedIdentifier,  // "x", `x` or [x]; never a keyword
  kInteger,
  kReal,
  kString,
  kBlob,
  kParameter,
  kOperator,
  kLParen,
  kRParen,
  kComma,
  kDot,
  kSemicolon,
  kEnd,
};

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;   // raw source slice
  std::string value;  // decoded identifier name or string contents
  std::size_t offset = 0;
};

struct LexError {
  std::size_t offset = 0;
  std::string message;
};

struct LexResult {
  std::vector<Token> tokens;  // always terminated by a kEnd token
  std::optional<LexError> error;
};

/// Tokenizes SQLite-flavoured SQL. Comments are dropped.
LexResult tokenize(std::string_view sql);

/// True for words that cannot be used as bare identifiers or implicit
/// aliases. `upper` must already be upper-cased.
bool is_reserved_word(std::string_view upper);

/// Splits text into statements at top-level semicolons, skipping statements
/// that contain only whitespace or comments. Text that fails to tokenize
/// is split up to the failure point; the remainder is one statement.
std::vector<std::string> split_statements(std::string_view text);

}  // namespace qdt::sql

#endif  // QDT_SQL_LEXER_HPP_
