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

#ifndef QDT_SQL_PRINTER_HPP_
#define QDT_SQL_PRINTER_HPP_

#include <string>
#include <string_view>

#include "qdt/sql/ast.hpp"

namespace qdt::sql {

// Canonical SQL text: upper-case keywords, single spaces, minimal
// parentheses. Identifiers and function names keep their written spelling.
// Printing is deterministic and parse(to_sql(x)) is structurally equal to x.
std::string to_sql(const SelectStatement& stmt);
std::string to_sql(const Expr& expr);

/// Double-quotes an identifier unless it is a plain non-reserved word.
std::string quote_identifier(std::string_view name);
std::string quote_string(std::string_view value);

}  // namespace qdt::sql

#endif  // QDT_SQL_PRINTER_HPP_
