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

#ifndef QDT_GATEWAY_HPP_
#define QDT_GATEWAY_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "qdt/policy.hpp"
#include "qdt/store.hpp"

namespace qdt {

struct QueryRequest {
  std::string session_id;
  std::string sql;
};

struct ExecutionFailure {
  std::string code;  // "execution" or "timeout"
  std::string message;
};

struct QueryResponse {
  enum class Status { kApproved, kRejected };

  Status status = Status::kRejected;
  std::vector<Violation> violations;
  std::vector<std::string> columns;
  std::vector<Row> rows;
  std::size_t suppressed_groups = 0;
  std::string rewritten_sql;
  double elapsed_ms = 0;
  bool truncated = false;
  std::optional<ExecutionFailure> execution_error;  // approved but the engine failed

  nlohmann::json to_json() const;
  static QueryResponse from_json(const nlohmann::json& j);
};

std::string_view to_string(QueryResponse::Status s);

struct AuditEntry {
  std::uint64_t seq = 0;
  std::string timestamp;  // UTC, ISO 8601 with milliseconds
  std::string session_id;
  std::string raw_sql;
  std::string verdict;  // "approved", "rejected" or "error"
  std::vector<std::string> violation_codes;
  std::string rewritten_sql;
  std::size_t row_count = 0;
  double elapsed_ms = 0;
  std::string error;

  nlohmann::json to_json() const;
  static AuditEntry from_json(const nlohmann::json& j);
};

/// Append-only newline-delimited JSON log. One writer; sequence numbers are
/// gapless and continue across reopenings of the same file.
class AuditLog {
 public:
  explicit AuditLog(std::filesystem::path path);

  /// Assigns seq and timestamp, writes and flushes, and returns the entry.
  AuditEntry append(AuditEntry entry);
  /// Entries with from <= seq <= to (bounds inclusive, both optional).
  std::vector<AuditEntry> read(std::optional<std::uint64_t> from = std::nullopt,
                               std::optional<std::uint64_t> to = std::nullopt) const;
  std::uint64_t last_seq() const;
  const std::filesystem::path& path() const { return path_; }

  /// Loads every entry from a log file.
  static std::vector<AuditEntry> load(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::ofstream out_;
  std::vector<AuditEntry> entries_;
};

/// Request handling independent of transport.
class QueryGateway {
 public:
  /// `store` may be null or not yet ingested; requests are then answered
  /// with kNotReady errors (and still audited).
  QueryGateway(std::shared_ptr<DatasetStore> store, PolicyConfig policy, std::shared_ptr<AuditLog> audit,
               std::chrono::milliseconds query_timeout = std::chrono::milliseconds(5000));

  bool ready() const;
  /// Throws kNotReady when no data is loaded. Audited with verdict "error".
  QueryResponse handle_query(const QueryRequest& request);
  /// {"document": text, "catalog": json}. Throws kNotReady.
  nlohmann::json handle_schema() const;
  /// Throws kInvalidArgument for an inverted range.
  std::vector<AuditEntry> handle_audit(std::optional<std::uint64_t> from, std::optional<std::uint64_t> to) const;
  /// Audits a request that never reached the policy engine.
  void record_error(const std::string& session_id, const std::string& raw, const std::string& message);

  const PolicyConfig& policy() const { return policy_; }
  AuditLog& audit() { return *audit_; }

 private:
  std::shared_ptr<DatasetStore> store_;
  PolicyConfig policy_;
  std::shared_ptr<AuditLog> audit_;
  std::chrono::milliseconds timeout_;
  std::unique_ptr<PolicyEngine> engine_;
};

struct GatewayConfig {
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store;
  std::filesystem::path audit_log = "audit.ndjson";
  PolicyConfig policy;
  std::chrono::milliseconds query_timeout{5000};

  /// Relative paths resolve against `base_dir`.
  static GatewayConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static GatewayConfig load(const std::filesystem::path& path);
};

/// HTTP/JSON front end: POST /v1/query, GET /v1/schema, GET /v1/audit,
/// GET /v1/health.
class GatewayServer {
 public:
  explicit GatewayServer(std::shared_ptr<QueryGateway> gateway);
  ~GatewayServer();
  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Throws kIo if the address is unavailable.
  int start(const std::string& host, int port);
  /// Stops accepting, lets in-flight requests finish, and joins.
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

/// What the agent sees of the gateway.
class GatewayClient {
 public:
  virtual ~GatewayClient() = default;
  /// Throws kTransport when the gateway cannot be reached.
  virtual QueryResponse query(const QueryRequest& request) = 0;
  virtual nlohmann::json schema() = 0;
};

/// Talks to a GatewayServer over HTTP. Safe for concurrent use.
class HttpGatewayClient : public GatewayClient {
 public:
  explicit HttpGatewayClient(std::string base_url,
                             std::chrono::milliseconds timeout = std::chrono::milliseconds(30000));
  QueryResponse query(const QueryRequest& request) override;
  nlohmann::json schema() override;
  bool healthy();

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

}  // namespace qdt

#endif  // QDT_GATEWAY_HPP_
