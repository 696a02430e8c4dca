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

#ifndef QDT_STORE_HPP_
#define QDT_STORE_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdt/approval.hpp"
#include "qdt/policy.hpp"
#include "qdt/schema.hpp"
#include "qdt/value.hpp"

struct sqlite3;

namespace qdt {

struct IngestReport {
  std::size_t rows_ingested = 0;  // data rows read, stored or rejected
  std::size_t nulls_normalized = 0;
  std::size_t label_positive_count = 0;
  std::size_t label_negative_count = 0;
  std::size_t rejected_rows = 0;
  std::vector<std::string> rejection_reasons;  // first few, "line N: reason"

  nlohmann::json to_json() const;
};

/// One held-out record. Absent keys are missing features.
struct TestRecord {
  std::string record_id;
  std::map<std::string, Value> present_features;
  std::optional<int> true_label;
};

nlohmann::json test_record_to_json(const TestRecord& r);
TestRecord test_record_from_json(const nlohmann::json& j);

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<Row> rows;
  bool truncated = false;  // more rows existed than the cap
  double elapsed_ms = 0;
};

struct ExecutionLimits {
  std::size_t max_rows = 100;
  std::chrono::milliseconds timeout{5000};
};

/// Registers STDDEV/STDDEV_SAMP/STDDEV_POP and VARIANCE/VAR_SAMP/VAR_POP
/// aggregates on a connection.
void register_statistics_functions(sqlite3* db);

/// The cohort database: a single SQLite file holding one data table plus
/// catalog metadata. After ingest and split it is read-only, and the only
/// way to read data is execute_approved().
class DatasetStore {
 public:
  /// Creates a new, empty store file. Fails if the file exists unless
  /// `overwrite` is set.
  static DatasetStore create(const std::filesystem::path& path, bool overwrite = false);
  /// Opens an existing store. Fails with kNotFound if the file is missing.
  static DatasetStore open(const std::filesystem::path& path);

  DatasetStore(DatasetStore&&) noexcept;
  DatasetStore& operator=(DatasetStore&&) noexcept;
  ~DatasetStore();

  /// Loads a CSV whose header matches the configured source columns.
  IngestReport ingest_csv(const std::filesystem::path& csv, const SchemaConfig& config);

  /// True once a table has been ingested.
  bool ready() const;
  /// Throws kNotReady before ingest.
  const SchemaCatalog& catalog() const;
  std::size_t row_count() const;
  const std::filesystem::path& path() const;

  /// Moves `test_size` rows, chosen by a seeded shuffle, out of the
  /// queryable table and returns them sorted by storage order.
  std::vector<TestRecord> split_dataset(std::uint64_t seed, std::size_t test_size);

  /// Only queries signed by this authority will execute.
  void trust(std::shared_ptr<const ApprovalAuthority> authority);

  /// Runs approved SQL on a pooled read-only connection. Safe for
  /// concurrent callers. Throws kUnauthorized for bad tokens, kExecution
  /// for engine errors, kTimeout when the limit is hit.
  ResultSet execute_approved(const ApprovedQuery& query, const ExecutionLimits& limits) const;

 private:
  struct Impl;
  explicit DatasetStore(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Tables and columns only, without the policy section.
std::string export_catalog_doc(const SchemaCatalog& catalog);
/// Deterministic text description of the catalog and the query rules;
/// the only description of the data shown to the agent.
std::string export_schema_doc(const SchemaCatalog& catalog, const PolicyConfig& policy);

}  // namespace qdt

#endif  // QDT_STORE_HPP_
