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

#ifndef QDT_SCHEMA_HPP_
#define QDT_SCHEMA_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace qdt {

enum class ValueType { kInteger, kReal, kCategorical };
enum class ColumnRole { kIdentifier, kFeature, kLabel };

std::string_view to_string(ValueType t);
std::string_view to_string(ColumnRole r);

struct ColumnMeta {
  std::string name;
  ValueType value_type = ValueType::kCategorical;
  ColumnRole role = ColumnRole::kFeature;
  std::optional<std::vector<std::string>> categorical_domain;
  bool nullable = true;
  std::string description;
};

struct TableMeta {
  std::string name;
  std::vector<ColumnMeta> columns;

  // Lookups are case-insensitive, matching SQL identifier semantics.
  const ColumnMeta* find(std::string_view column) const;
  const ColumnMeta& label() const;
  std::vector<std::string> names_with_role(ColumnRole role) const;
};

/// Table/column metadata. This is the only description of the data that
/// is ever shown to the agent.
struct SchemaCatalog {
  std::vector<TableMeta> tables;

  bool empty() const { return tables.empty(); }
  const TableMeta* find_table(std::string_view name) const;
  /// The single ingested table; throws kNotReady when the catalog is empty.
  const TableMeta& primary() const;

  /// Throws kInvalidArgument when an invariant is broken: exactly one label
  /// column per table, nonempty duplicate-free categorical domains.
  void validate() const;
};

nlohmann::json catalog_to_json(const SchemaCatalog& catalog);
SchemaCatalog catalog_from_json(const nlohmann::json& j);

/// One column of the ingestion config: catalog metadata plus how to read it
/// from the source CSV.
struct ColumnSpec {
  ColumnMeta meta;
  std::string source;  // CSV header name; defaults to meta.name
  // Label columns only: raw values accepted, and those mapped to label 1.
  std::vector<std::string> accepted_values;
  std::vector<std::string> positive_values;
};

struct SchemaConfig {
  std::string table;
  std::string missing_sentinel = "?";
  std::size_t max_rejected_rows = 0;
  std::vector<ColumnSpec> columns;

  static SchemaConfig from_json(const nlohmann::json& j);
  static SchemaConfig load(const std::filesystem::path& path);

  /// Catalog as declared; `nullable` is refined by ingestion.
  SchemaCatalog catalog() const;
};

/// ASCII case-insensitive equality for SQL identifiers.
bool iequals(std::string_view a, std::string_view b);
std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace qdt

#endif  // QDT_SCHEMA_HPP_
