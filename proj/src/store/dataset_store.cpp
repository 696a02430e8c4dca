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

#include <sqlite3.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>

#include "qdt/error.hpp"
#include "qdt/sql/printer.hpp"
#include "qdt/store.hpp"

namespace qdt {

using nlohmann::json;

namespace {

constexpr const char* kMetaTable = "_qdt_meta";
constexpr std::size_t kMaxReasons = 20;

// Owns a prepared statement.
class Statement {
 public:
  Statement(sqlite3* db, const std::string& sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.c_str(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK) {
      throw Error(ErrorCode::kExecution, sqlite3_errmsg(db));
    }
  }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;
  ~Statement() { sqlite3_finalize(stmt_); }

  sqlite3_stmt* get() const { return stmt_; }

  // True while rows remain.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error(rc == SQLITE_INTERRUPT ? ErrorCode::kTimeout : ErrorCode::kExecution, sqlite3_errmsg(db_));
  }

  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  void bind(int index, const Value& v) {
    int rc = SQLITE_OK;
    if (is_null(v)) {
      rc = sqlite3_bind_null(stmt_, index);
    } else if (const auto* i = std::get_if<std::int64_t>(&v)) {
      rc = sqlite3_bind_int64(stmt_, index, *i);
    } else if (const auto* d = std::get_if<double>(&v)) {
      rc = sqlite3_bind_double(stmt_, index, *d);
    } else {
      const auto& s = std::get<std::string>(v);
      rc = sqlite3_bind_text(stmt_, index, s.data(), static_cast<int>(s.size()), SQLITE_TRANSIENT);
    }
    if (rc != SQLITE_OK) throw Error(ErrorCode::kExecution, sqlite3_errmsg(db_));
  }

  Value column(int index) const {
    switch (sqlite3_column_type(stmt_, index)) {
      case SQLITE_INTEGER: return static_cast<std::int64_t>(sqlite3_column_int64(stmt_, index));
      case SQLITE_FLOAT: return sqlite3_column_double(stmt_, index);
      case SQLITE_NULL: return std::monostate{};
      default: {
        const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, index));
        return std::string(text ? text : "", static_cast<std::size_t>(sqlite3_column_bytes(stmt_, index)));
      }
    }
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string message = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorCode::kExecution, message);
  }
}

sqlite3* open_connection(const std::filesystem::path& path, int flags) {
  sqlite3* db = nullptr;
  if (sqlite3_open_v2(path.c_str(), &db, flags | SQLITE_OPEN_NOMUTEX, nullptr) != SQLITE_OK) {
    std::string message = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close(db);
    throw Error(ErrorCode::kIo, "cannot open store " + path.string() + ": " + message);
  }
  sqlite3_busy_timeout(db, 5000);
  register_statistics_functions(db);
  return db;
}

// Splits CSV text into records (RFC 4180 quoting, LF or CRLF endings).
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (in_.get(c)) {
      any = true;
      if (quoted) {
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get(c);
            field += '"';
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\n') {
        fields.push_back(std::move(field));
        ++line_;
        return true;
      } else if (c != '\r') {
        field += c;
      }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    ++line_;
    return true;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::string sql_type(ValueType t) {
  switch (t) {
    case ValueType::kInteger: return "INTEGER";
    case ValueType::kReal: return "REAL";
    case ValueType::kCategorical: return "TEXT";
  }
  return "TEXT";
}

std::optional<std::int64_t> parse_integer(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
  return static_cast<std::int64_t>(v);
}

std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

bool contains(const std::vector<std::string>& values, const std::string& v) {
  return std::find(values.begin(), values.end(), v) != values.end();
}

// Uniform index in [0, bound) from a 64-bit draw; identical on every platform.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * bound) >> 64);
}

}  // namespace

json IngestReport::to_json() const {
  return {{"rows_ingested", rows_ingested},
          {"nulls_normalized", nulls_normalized},
          {"label_positive_count", label_positive_count},
          {"label_negative_count", label_negative_count},
          {"rejected_rows", rejected_rows},
          {"rejection_reasons", rejection_reasons}};
}

json test_record_to_json(const TestRecord& r) {
  json features = json::object();
  for (const auto& [k, v] : r.present_features) features[k] = value_to_json(v);
  json j = {{"record_id", r.record_id}, {"features", std::move(features)}};
  j["true_label"] = r.true_label ? json(*r.true_label) : json(nullptr);
  return j;
}

TestRecord test_record_from_json(const json& j) {
  TestRecord r;
  try {
    r.record_id = j.at("record_id").is_string() ? j.at("record_id").get<std::string>() : j.at("record_id").dump();
    if (j.contains("features")) {
      for (const auto& [k, v] : j.at("features").items()) {
        if (!v.is_null()) r.present_features[k] = value_from_json(v);
      }
    }
    if (j.contains("true_label") && !j.at("true_label").is_null()) {
      const int label = j.at("true_label").get<int>();
      if (label != 0 && label != 1) throw Error(ErrorCode::kInvalidArgument, "true_label must be 0 or 1");
      r.true_label = label;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("test record: ") + e.what());
  }
  return r;
}

struct DatasetStore::Impl {
  std::filesystem::path path;
  sqlite3* writer = nullptr;
  std::optional<SchemaCatalog> catalog;
  std::shared_ptr<const ApprovalAuthority> authority;

  mutable std::mutex pool_mutex;
  mutable std::vector<sqlite3*> pool;

  ~Impl() {
    for (auto* db : pool) sqlite3_close(db);
    sqlite3_close(writer);
  }

  void load_catalog() {
    Statement exists(writer, "SELECT COUNT(*) FROM sqlite_master WHERE type = 'table' AND name = '" +
                                 std::string(kMetaTable) + "'");
    exists.step();
    if (std::get<std::int64_t>(exists.column(0)) == 0) return;
    Statement q(writer, "SELECT value FROM " + std::string(kMetaTable) + " WHERE key = 'catalog'");
    if (q.step()) catalog = catalog_from_json(json::parse(std::get<std::string>(q.column(0))));
  }

  void put_meta(const std::string& key, const std::string& value) {
    Statement s(writer, "INSERT OR REPLACE INTO " + std::string(kMetaTable) + " (key, value) VALUES (?, ?)");
    s.bind(1, key);
    s.bind(2, value);
    s.step();
  }

  sqlite3* acquire() const {
    {
      std::lock_guard lock(pool_mutex);
      if (!pool.empty()) {
        sqlite3* db = pool.back();
        pool.pop_back();
        return db;
      }
    }
    return open_connection(path, SQLITE_OPEN_READONLY);
  }

  void release(sqlite3* db) const {
    std::lock_guard lock(pool_mutex);
    pool.push_back(db);
  }

  // Drops pooled connections so readers see a new snapshot after writes.
  void reset_pool() {
    std::lock_guard lock(pool_mutex);
    for (auto* db : pool) sqlite3_close(db);
    pool.clear();
  }
};

DatasetStore::DatasetStore(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
DatasetStore::DatasetStore(DatasetStore&&) noexcept = default;
DatasetStore& DatasetStore::operator=(DatasetStore&&) noexcept = default;
DatasetStore::~DatasetStore() = default;

DatasetStore DatasetStore::create(const std::filesystem::path& path, bool overwrite) {
  if (std::filesystem::exists(path)) {
    if (!overwrite) throw Error(ErrorCode::kAlreadyExists, "store already exists: " + path.string());
    std::filesystem::remove(path);
  }
  auto impl = std::make_unique<Impl>();
  impl->path = path;
  impl->writer = open_connection(path, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
  exec(impl->writer, "CREATE TABLE " + std::string(kMetaTable) + " (key TEXT PRIMARY KEY, value TEXT NOT NULL)");
  return DatasetStore(std::move(impl));
}

DatasetStore DatasetStore::open(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kNotFound, "store not found: " + path.string());
  auto impl = std::make_unique<Impl>();
  impl->path = path;
  impl->writer = open_connection(path, SQLITE_OPEN_READWRITE);
  impl->load_catalog();
  return DatasetStore(std::move(impl));
}

bool DatasetStore::ready() const { return impl_->catalog.has_value(); }

const SchemaCatalog& DatasetStore::catalog() const {
  if (!impl_->catalog) throw Error(ErrorCode::kNotReady, "store has no ingested data: " + impl_->path.string());
  return *impl_->catalog;
}

const std::filesystem::path& DatasetStore::path() const { return impl_->path; }

std::size_t DatasetStore::row_count() const {
  const auto& table = catalog().primary();
  Statement s(impl_->writer, "SELECT COUNT(*) FROM " + sql::quote_identifier(table.name));
  s.step();
  return static_cast<std::size_t>(std::get<std::int64_t>(s.column(0)));
}

IngestReport DatasetStore::ingest_csv(const std::filesystem::path& csv, const SchemaConfig& config) {
  if (impl_->catalog) throw Error(ErrorCode::kAlreadyExists, "store already holds ingested data");
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open CSV " + csv.string());
  CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw Error(ErrorCode::kSchemaMismatch, "CSV file is empty: " + csv.string());
  if (!header.empty() && header.front().rfind("\xEF\xBB\xBF", 0) == 0) header.front().erase(0, 3);

  // Map each configured column to its header position.
  std::vector<std::size_t> positions;
  std::vector<std::string> absent;
  for (const auto& spec : config.columns) {
    auto it = std::find(header.begin(), header.end(), spec.source);
    if (it == header.end()) {
      absent.push_back(spec.source);
    } else {
      positions.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }
  std::vector<std::string> unexpected;
  for (const auto& h : header) {
    const bool known = std::any_of(config.columns.begin(), config.columns.end(),
                                   [&](const ColumnSpec& s) { return s.source == h; });
    if (!known) unexpected.push_back(h);
  }
  if (!absent.empty() || !unexpected.empty()) {
    std::ostringstream msg;
    msg << "CSV header does not match schema config";
    if (!absent.empty()) {
      msg << "; absent columns:";
      for (const auto& a : absent) msg << ' ' << a;
    }
    if (!unexpected.empty()) {
      msg << "; unexpected columns:";
      for (const auto& u : unexpected) msg << ' ' << u;
    }
    throw Error(ErrorCode::kSchemaMismatch, msg.str());
  }

  SchemaCatalog catalog = config.catalog();
  const std::string table = sql::quote_identifier(config.table);
  std::ostringstream ddl;
  ddl << "CREATE TABLE " << table << " (";
  std::ostringstream insert;
  insert << "INSERT INTO " << table << " VALUES (";
  for (std::size_t i = 0; i < config.columns.size(); ++i) {
    const auto& m = config.columns[i].meta;
    ddl << (i ? ", " : "") << sql::quote_identifier(m.name) << ' ' << sql_type(m.value_type);
    insert << (i ? ", ?" : "?");
  }
  ddl << ")";
  insert << ")";

  IngestReport report;
  std::vector<bool> saw_null(config.columns.size(), false);
  exec(impl_->writer, "BEGIN");
  try {
    exec(impl_->writer, ddl.str());
    Statement stmt(impl_->writer, insert.str());
    std::vector<std::string> fields;
    Row row(config.columns.size());
    while (reader.next(fields)) {
      if (fields.size() == 1 && fields.front().empty()) continue;  // blank line
      ++report.rows_ingested;
      std::string reason;
      std::size_t nulls = 0;
      int label = 0;
      if (fields.size() != header.size()) {
        reason = "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size());
      }
      for (std::size_t i = 0; reason.empty() && i < config.columns.size(); ++i) {
        const auto& spec = config.columns[i];
        const std::string& raw = fields[positions[i]];
        if (spec.meta.role == ColumnRole::kLabel) {
          if (contains(spec.positive_values, raw)) {
            label = 1;
          } else if (spec.accepted_values.empty() || contains(spec.accepted_values, raw)) {
            label = 0;
          } else {
            reason = "unexpected label value '" + raw + "' in " + spec.source;
            break;
          }
          row[i] = std::int64_t{label};
          continue;
        }
        if (raw == config.missing_sentinel || raw.empty()) {
          if (raw == config.missing_sentinel) ++nulls;
          row[i] = std::monostate{};
          continue;
        }
        switch (spec.meta.value_type) {
          case ValueType::kInteger:
            if (auto v = parse_integer(raw)) {
              row[i] = *v;
            } else {
              reason = "unparseable integer '" + raw + "' in " + spec.source;
            }
            break;
          case ValueType::kReal:
            if (auto v = parse_real(raw)) {
              row[i] = *v;
            } else {
              reason = "unparseable number '" + raw + "' in " + spec.source;
            }
            break;
          case ValueType::kCategorical:
            if (spec.meta.categorical_domain && !contains(*spec.meta.categorical_domain, raw)) {
              reason = "value '" + raw + "' outside the domain of " + spec.source;
            } else {
              row[i] = raw;
            }
            break;
        }
      }
      if (!reason.empty()) {
        ++report.rejected_rows;
        if (report.rejection_reasons.size() < kMaxReasons) {
          report.rejection_reasons.push_back("line " + std::to_string(reader.line()) + ": " + reason);
        }
        if (report.rejected_rows > config.max_rejected_rows) {
          throw Error(ErrorCode::kParse, "too many rejected rows (more than " +
                                             std::to_string(config.max_rejected_rows) + "); last: " + reason);
        }
        continue;
      }
      report.nulls_normalized += nulls;
      (label ? report.label_positive_count : report.label_negative_count) += 1;
      stmt.reset();
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (is_null(row[i])) saw_null[i] = true;
        stmt.bind(static_cast<int>(i + 1), row[i]);
      }
      stmt.step();
    }
    for (std::size_t i = 0; i < config.columns.size(); ++i) {
      catalog.tables.front().columns[i].nullable = saw_null[i];
    }
    impl_->put_meta("catalog", catalog_to_json(catalog).dump());
    impl_->put_meta("ingest_report", report.to_json().dump());
    exec(impl_->writer, "COMMIT");
  } catch (...) {
    sqlite3_exec(impl_->writer, "ROLLBACK", nullptr, nullptr, nullptr);
    throw;
  }
  impl_->catalog = std::move(catalog);
  impl_->reset_pool();
  return report;
}

std::vector<TestRecord> DatasetStore::split_dataset(std::uint64_t seed, std::size_t test_size) {
  const auto& table = catalog().primary();
  const std::string name = sql::quote_identifier(table.name);
  std::vector<std::int64_t> rowids;
  {
    Statement s(impl_->writer, "SELECT rowid FROM " + name + " ORDER BY rowid");
    while (s.step()) rowids.push_back(std::get<std::int64_t>(s.column(0)));
  }
  if (test_size > rowids.size()) {
    throw Error(ErrorCode::kInvalidArgument, "test size " + std::to_string(test_size) + " exceeds the " +
                                                 std::to_string(rowids.size()) + " available rows");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = rowids.size(); i > 1; --i) {
    std::swap(rowids[i - 1], rowids[bounded(rng, i)]);
  }
  std::vector<std::int64_t> chosen(rowids.begin(), rowids.begin() + static_cast<std::ptrdiff_t>(test_size));
  std::sort(chosen.begin(), chosen.end());

  const auto ids = table.names_with_role(ColumnRole::kIdentifier);
  std::vector<TestRecord> records;
  records.reserve(chosen.size());
  exec(impl_->writer, "BEGIN");
  try {
    Statement select(impl_->writer, "SELECT * FROM " + name + " WHERE rowid = ?");
    Statement remove(impl_->writer, "DELETE FROM " + name + " WHERE rowid = ?");
    for (auto rowid : chosen) {
      select.reset();
      select.bind(1, rowid);
      if (!select.step()) throw Error(ErrorCode::kInternal, "row vanished during split");
      TestRecord record;
      record.record_id = std::to_string(rowid);
      for (std::size_t i = 0; i < table.columns.size(); ++i) {
        const auto& col = table.columns[i];
        Value v = select.column(static_cast<int>(i));
        if (col.role == ColumnRole::kLabel) {
          if (const auto* label = std::get_if<std::int64_t>(&v)) record.true_label = static_cast<int>(*label);
        } else if (col.role == ColumnRole::kIdentifier) {
          if (!ids.empty() && col.name == ids.front() && !is_null(v)) record.record_id = format_value(v);
        } else if (!is_null(v)) {
          record.present_features.emplace(col.name, std::move(v));
        }
      }
      records.push_back(std::move(record));
      remove.reset();
      remove.bind(1, rowid);
      remove.step();
    }
    impl_->put_meta("split", json{{"seed", seed}, {"test_size", test_size}}.dump());
    exec(impl_->writer, "COMMIT");
  } catch (...) {
    sqlite3_exec(impl_->writer, "ROLLBACK", nullptr, nullptr, nullptr);
    throw;
  }
  impl_->reset_pool();
  return records;
}

void DatasetStore::trust(std::shared_ptr<const ApprovalAuthority> authority) {
  impl_->authority = std::move(authority);
}

ResultSet DatasetStore::execute_approved(const ApprovedQuery& query, const ExecutionLimits& limits) const {
  if (!impl_->authority || !impl_->authority->verify(query.sql(), query.token())) {
    throw Error(ErrorCode::kUnauthorized, "query does not carry a valid approval token");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto deadline = start + limits.timeout;
  sqlite3* db = impl_->acquire();
  struct Lease {
    const Impl* impl;
    sqlite3* db;
    ~Lease() {
      sqlite3_progress_handler(db, 0, nullptr, nullptr);
      impl->release(db);
    }
  } lease{impl_.get(), db};

  auto deadline_copy = deadline;
  sqlite3_progress_handler(
      db, 1000,
      [](void* arg) -> int {
        const auto* limit = static_cast<const std::chrono::steady_clock::time_point*>(arg);
        return std::chrono::steady_clock::now() > *limit ? 1 : 0;
      },
      &deadline_copy);

  ResultSet result;
  try {
    Statement stmt(db, query.sql());
    const int ncols = sqlite3_column_count(stmt.get());
    for (int i = 0; i < ncols; ++i) {
      const char* name = sqlite3_column_name(stmt.get(), i);
      result.columns.emplace_back(name ? name : "");
    }
    while (stmt.step()) {
      if (result.rows.size() >= limits.max_rows) {
        result.truncated = true;
        break;
      }
      Row row;
      row.reserve(static_cast<std::size_t>(ncols));
      for (int i = 0; i < ncols; ++i) row.push_back(stmt.column(i));
      result.rows.push_back(std::move(row));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kTimeout ||
        std::chrono::steady_clock::now() > deadline) {
      throw Error(ErrorCode::kTimeout, "query exceeded the " + std::to_string(limits.timeout.count()) +
                                           " ms time limit");
    }
    throw;
  }
  result.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace qdt
