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

#include "qdt/schema.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "qdt/error.hpp"

namespace qdt {

using nlohmann::json;

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::kInteger: return "integer";
    case ValueType::kReal: return "real";
    case ValueType::kCategorical: return "categorical";
  }
  return "?";
}

std::string_view to_string(ColumnRole r) {
  switch (r) {
    case ColumnRole::kIdentifier: return "identifier";
    case ColumnRole::kFeature: return "feature";
    case ColumnRole::kLabel: return "label";
  }
  return "?";
}

namespace {

ValueType parse_value_type(const std::string& s) {
  if (s == "integer") return ValueType::kInteger;
  if (s == "real") return ValueType::kReal;
  if (s == "categorical" || s == "categorical-text" || s == "text") return ValueType::kCategorical;
  throw Error(ErrorCode::kInvalidArgument, "unknown column type '" + s + "'");
}

ColumnRole parse_role(const std::string& s) {
  if (s == "identifier") return ColumnRole::kIdentifier;
  if (s == "feature") return ColumnRole::kFeature;
  if (s == "label") return ColumnRole::kLabel;
  throw Error(ErrorCode::kInvalidArgument, "unknown column role '" + s + "'");
}

bool is_plain_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

}  // namespace

const ColumnMeta* TableMeta::find(std::string_view column) const {
  for (const auto& c : columns) {
    if (iequals(c.name, column)) return &c;
  }
  return nullptr;
}

const ColumnMeta& TableMeta::label() const {
  for (const auto& c : columns) {
    if (c.role == ColumnRole::kLabel) return c;
  }
  throw Error(ErrorCode::kInvalidArgument, "table '" + name + "' has no label column");
}

std::vector<std::string> TableMeta::names_with_role(ColumnRole role) const {
  std::vector<std::string> out;
  for (const auto& c : columns) {
    if (c.role == role) out.push_back(c.name);
  }
  return out;
}

const TableMeta* SchemaCatalog::find_table(std::string_view name) const {
  for (const auto& t : tables) {
    if (iequals(t.name, name)) return &t;
  }
  return nullptr;
}

const TableMeta& SchemaCatalog::primary() const {
  if (tables.empty()) throw Error(ErrorCode::kNotReady, "schema catalog is empty");
  return tables.front();
}

void SchemaCatalog::validate() const {
  if (tables.empty()) throw Error(ErrorCode::kInvalidArgument, "catalog has no tables");
  for (const auto& t : tables) {
    if (!is_plain_identifier(t.name)) {
      throw Error(ErrorCode::kInvalidArgument, "table name '" + t.name + "' is not a plain identifier");
    }
    std::size_t labels = 0;
    std::set<std::string> seen;
    for (const auto& c : t.columns) {
      if (!is_plain_identifier(c.name)) {
        throw Error(ErrorCode::kInvalidArgument, "column name '" + c.name + "' is not a plain identifier");
      }
      if (!seen.insert(to_lower(c.name)).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate column '" + c.name + "'");
      }
      if (c.role == ColumnRole::kLabel) ++labels;
      if (c.categorical_domain) {
        if (c.categorical_domain->empty()) {
          throw Error(ErrorCode::kInvalidArgument, "column '" + c.name + "' has an empty domain");
        }
        std::set<std::string> values(c.categorical_domain->begin(), c.categorical_domain->end());
        if (values.size() != c.categorical_domain->size()) {
          throw Error(ErrorCode::kInvalidArgument, "column '" + c.name + "' has duplicate domain values");
        }
      }
    }
    if (labels != 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "table '" + t.name + "' must have exactly one label column, found " + std::to_string(labels));
    }
  }
}

json catalog_to_json(const SchemaCatalog& catalog) {
  json tables = json::array();
  for (const auto& t : catalog.tables) {
    json cols = json::array();
    for (const auto& c : t.columns) {
      json col = {{"name", c.name},
                  {"type", to_string(c.value_type)},
                  {"role", to_string(c.role)},
                  {"nullable", c.nullable}};
      if (c.categorical_domain) col["domain"] = *c.categorical_domain;
      if (!c.description.empty()) col["description"] = c.description;
      cols.push_back(std::move(col));
    }
    tables.push_back({{"name", t.name}, {"columns", std::move(cols)}});
  }
  return {{"tables", std::move(tables)}};
}

SchemaCatalog catalog_from_json(const json& j) {
  SchemaCatalog catalog;
  for (const auto& t : j.at("tables")) {
    TableMeta table{t.at("name").get<std::string>(), {}};
    for (const auto& c : t.at("columns")) {
      ColumnMeta meta;
      meta.name = c.at("name").get<std::string>();
      meta.value_type = parse_value_type(c.at("type").get<std::string>());
      meta.role = parse_role(c.at("role").get<std::string>());
      meta.nullable = c.value("nullable", true);
      if (c.contains("domain")) meta.categorical_domain = c.at("domain").get<std::vector<std::string>>();
      meta.description = c.value("description", "");
      table.columns.push_back(std::move(meta));
    }
    catalog.tables.push_back(std::move(table));
  }
  return catalog;
}

SchemaConfig SchemaConfig::from_json(const json& j) {
  SchemaConfig cfg;
  try {
    cfg.table = j.at("table").get<std::string>();
    cfg.missing_sentinel = j.value("missing_sentinel", "?");
    cfg.max_rejected_rows = j.value("max_rejected_rows", std::size_t{0});
    for (const auto& c : j.at("columns")) {
      ColumnSpec spec;
      spec.meta.name = c.at("name").get<std::string>();
      spec.meta.value_type = parse_value_type(c.value("type", "categorical"));
      spec.meta.role = parse_role(c.value("role", "feature"));
      if (c.contains("domain")) spec.meta.categorical_domain = c.at("domain").get<std::vector<std::string>>();
      spec.meta.description = c.value("description", "");
      spec.source = c.value("source", spec.meta.name);
      spec.accepted_values = c.value("accepted_values", std::vector<std::string>{});
      spec.positive_values = c.value("positive_values", std::vector<std::string>{});
      if (spec.meta.role == ColumnRole::kLabel) {
        if (spec.positive_values.empty()) {
          throw Error(ErrorCode::kInvalidArgument, "label column '" + spec.meta.name + "' needs positive_values");
        }
        // Labels are always stored binarized.
        spec.meta.value_type = ValueType::kInteger;
        spec.meta.categorical_domain.reset();
      }
      cfg.columns.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("schema config: ") + e.what());
  }
  cfg.catalog().validate();
  return cfg;
}

SchemaConfig SchemaConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open schema config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return from_json(j);
}

SchemaCatalog SchemaConfig::catalog() const {
  TableMeta meta{table, {}};
  for (const auto& c : columns) meta.columns.push_back(c.meta);
  return SchemaCatalog{{std::move(meta)}};
}

}  // namespace qdt
