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

#ifndef QDT_SQL_PARSER_HPP_
#define QDT_SQL_PARSER_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdt/sql/ast.hpp"

namespace qdt::sql {

enum class ParseErrorKind {
  kSyntax,           // malformed SELECT
  kForbiddenStatement,  // a statement kind other than SELECT
  kMultiStatement,
};

struct ParseError {
  ParseErrorKind kind = ParseErrorKind::kSyntax;
  std::size_t offset = 0;
  std::string message;
};

struct ParseResult {
  std::optional<SelectStatement> statement;
  std::vector<ParseError> errors;  // empty iff statement is set
};

/// Parses exactly one SELECT statement (one trailing semicolon allowed).
ParseResult parse_select(std::string_view text);

}  // namespace qdt::sql

#endif  // QDT_SQL_PARSER_HPP_
