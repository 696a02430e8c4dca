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

#include <sstream>

#include "qdt/error.hpp"
#include "qdt/store.hpp"

namespace qdt {

std::string export_catalog_doc(const SchemaCatalog& catalog) {
  if (catalog.empty()) throw Error(ErrorCode::kNotReady, "schema catalog is empty");
  std::ostringstream out;
  for (const auto& table : catalog.tables) {
    out << "TABLE " << table.name << " (" << table.columns.size() << " columns)\n";
    for (const auto& col : table.columns) {
      out << "- " << col.name << ": " << to_string(col.value_type) << ", " << to_string(col.role)
          << (col.nullable ? ", nullable" : ", not null");
      if (!col.description.empty()) out << " -- " << col.description;
      out << '\n';
      if (col.role == ColumnRole::kIdentifier) continue;
      if (col.categorical_domain) {
        out << "    values:";
        for (std::size_t i = 0; i < col.categorical_domain->size(); ++i) {
          out << (i ? ", " : " ") << '\'' << (*col.categorical_domain)[i] << '\'';
        }
        out << '\n';
      }
    }
    const auto& label = table.label();
    out << "LABEL " << label.name << ": "
        << (label.description.empty() ? std::string("binary outcome (0 or 1)") : label.description) << '\n';
    const auto ids = table.names_with_role(ColumnRole::kIdentifier);
    if (!ids.empty()) {
      out << "IDENTIFIERS:";
      for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? ", " : " ") << ids[i];
      out << " (usable only in WHERE or COUNT(DISTINCT ...))\n";
    }
    out << '\n';
  }
  return out.str();
}

std::string export_schema_doc(const SchemaCatalog& catalog, const PolicyConfig& policy) {
  std::ostringstream out;
  out << export_catalog_doc(catalog) << "POLICY (k_min = " << policy.k_min << ")\n" << policy.summary();
  return out.str();
}

}  // namespace qdt
