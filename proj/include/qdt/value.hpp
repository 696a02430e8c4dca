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

#ifndef QDT_VALUE_HPP_
#define QDT_VALUE_HPP_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace qdt {

/// A single SQL cell value. std::monostate is SQL NULL.
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;
using Row = std::vector<Value>;

inline bool is_null(const Value& v) {
  return std::holds_alternative<std::monostate>(v);
}

/// Text rendering used in prompts and tables. Reals use up to 6 significant
/// digits so renderings are stable across platforms.
std::string format_value(const Value& v);

nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

}  // namespace qdt

#endif  // QDT_VALUE_HPP_
