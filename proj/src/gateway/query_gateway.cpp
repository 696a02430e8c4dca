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

#include "qdt/error.hpp"
#include "qdt/gateway.hpp"

namespace qdt {

using nlohmann::json;

std::string_view to_string(QueryResponse::Status s) {
  return s == QueryResponse::Status::kApproved ? "approved" : "rejected";
}

json QueryResponse::to_json() const {
  json violations_json = json::array();
  for (const auto& v : violations) violations_json.push_back(violation_to_json(v));
  json rows_json = json::array();
  for (const auto& row : rows) {
    json r = json::array();
    for (const auto& v : row) r.push_back(value_to_json(v));
    rows_json.push_back(std::move(r));
  }
  json j = {{"status", to_string(status)},
            {"violations", std::move(violations_json)},
            {"columns", columns},
            {"rows", std::move(rows_json)},
            {"suppressed_groups", suppressed_groups},
            {"rewritten_sql", rewritten_sql},
            {"elapsed_ms", elapsed_ms},
            {"truncated", truncated}};
  j["execution_error"] =
      execution_error ? json{{"code", execution_error->code}, {"message", execution_error->message}} : json(nullptr);
  return j;
}

QueryResponse QueryResponse::from_json(const json& j) {
  QueryResponse r;
  try {
    const auto status = j.at("status").get<std::string>();
    if (status != "approved" && status != "rejected") {
      throw Error(ErrorCode::kParse, "unknown response status '" + status + "'");
    }
    r.status = status == "approved" ? Status::kApproved : Status::kRejected;
    for (const auto& v : j.value("violations", json::array())) r.violations.push_back(violation_from_json(v));
    r.columns = j.value("columns", std::vector<std::string>{});
    for (const auto& row : j.value("rows", json::array())) {
      Row out;
      for (const auto& v : row) out.push_back(value_from_json(v));
      r.rows.push_back(std::move(out));
    }
    r.suppressed_groups = j.value("suppressed_groups", std::size_t{0});
    r.rewritten_sql = j.value("rewritten_sql", "");
    r.elapsed_ms = j.value("elapsed_ms", 0.0);
    r.truncated = j.value("truncated", false);
    if (j.contains("execution_error") && j.at("execution_error").is_object()) {
      const auto& e = j.at("execution_error");
      r.execution_error = ExecutionFailure{e.value("code", "execution"), e.value("message", "")};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("query response: ") + e.what());
  }
  return r;
}

QueryGateway::QueryGateway(std::shared_ptr<DatasetStore> store, PolicyConfig policy,
                           std::shared_ptr<AuditLog> audit, std::chrono::milliseconds query_timeout)
    : store_(std::move(store)), policy_(std::move(policy)), audit_(std::move(audit)), timeout_(query_timeout) {
  policy_.validate();
  if (!audit_) throw Error(ErrorCode::kInvalidArgument, "gateway needs an audit log");
  if (store_ && store_->ready()) {
    auto authority = ApprovalAuthority::generate();
    store_->trust(authority);
    engine_ = std::make_unique<PolicyEngine>(store_->catalog(), policy_, authority);
  }
}

bool QueryGateway::ready() const { return engine_ != nullptr; }

void QueryGateway::record_error(const std::string& session_id, const std::string& raw, const std::string& message) {
  AuditEntry entry;
  entry.session_id = session_id;
  entry.raw_sql = raw;
  entry.verdict = "error";
  entry.error = message;
  audit_->append(std::move(entry));
}

QueryResponse QueryGateway::handle_query(const QueryRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  if (!ready()) {
    record_error(request.session_id, request.sql, "gateway not ready: no data loaded");
    throw Error(ErrorCode::kNotReady, "gateway not ready: no data loaded");
  }
  QueryResponse response;
  AuditEntry entry;
  entry.session_id = request.session_id;
  entry.raw_sql = request.sql;

  const PolicyDecision decision = engine_->decide(request.sql);
  if (!decision.is_approved()) {
    response.status = QueryResponse::Status::kRejected;
    response.violations = decision.violations;
    entry.verdict = "rejected";
    for (const auto& v : decision.violations) entry.violation_codes.emplace_back(to_string(v.code));
  } else {
    response.status = QueryResponse::Status::kApproved;
    response.rewritten_sql = decision.approved->sql();
    entry.verdict = "approved";
    entry.rewritten_sql = response.rewritten_sql;
    const ExecutionLimits limits{policy_.max_rows, timeout_};
    try {
      ResultSet result = store_->execute_approved(*decision.approved, limits);
      response.columns = std::move(result.columns);
      response.rows = std::move(result.rows);
      response.truncated = result.truncated;
      if (decision.suppression_probe) {
        const ResultSet probe = store_->execute_approved(*decision.suppression_probe, limits);
        if (!probe.rows.empty() && !probe.rows.front().empty()) {
          if (const auto* n = std::get_if<std::int64_t>(&probe.rows.front().front())) {
            response.suppressed_groups = static_cast<std::size_t>(*n);
          }
        }
      }
    } catch (const Error& e) {
      response.columns.clear();
      response.rows.clear();
      response.truncated = false;
      response.suppressed_groups = 0;
      response.execution_error =
          ExecutionFailure{e.code() == ErrorCode::kTimeout ? "timeout" : "execution", e.what()};
      entry.error = e.what();
    }
    entry.row_count = response.rows.size();
  }
  response.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  entry.elapsed_ms = response.elapsed_ms;
  audit_->append(std::move(entry));
  return response;
}

json QueryGateway::handle_schema() const {
  if (!ready()) throw Error(ErrorCode::kNotReady, "gateway not ready: no data loaded");
  return {{"document", export_schema_doc(store_->catalog(), policy_)},
          {"catalog", catalog_to_json(store_->catalog())},
          {"policy", policy_.to_json()}};
}

std::vector<AuditEntry> QueryGateway::handle_audit(std::optional<std::uint64_t> from,
                                                   std::optional<std::uint64_t> to) const {
  if (from && to && *from > *to) {
    throw Error(ErrorCode::kInvalidArgument,
                "invalid audit range: from " + std::to_string(*from) + " > to " + std::to_string(*to));
  }
  if ((from && *from == 0) || (to && *to == 0)) {
    throw Error(ErrorCode::kInvalidArgument, "audit sequence numbers start at 1");
  }
  return audit_->read(from, to);
}

GatewayConfig GatewayConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  GatewayConfig cfg;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    cfg.bind = j.value("bind", cfg.bind);
    cfg.port = j.value("port", cfg.port);
    if (j.contains("store")) cfg.store = resolve(j.at("store").get<std::string>());
    if (j.contains("audit_log")) cfg.audit_log = resolve(j.at("audit_log").get<std::string>());
    if (j.contains("policy")) {
      cfg.policy = PolicyConfig::from_json(j.at("policy"));
    } else if (j.contains("policy_file")) {
      cfg.policy = PolicyConfig::load(resolve(j.at("policy_file").get<std::string>()));
    }
    cfg.query_timeout = std::chrono::milliseconds(j.value("query_timeout_ms", cfg.query_timeout.count()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("gateway config: ") + e.what());
  }
  if (cfg.port < 0 || cfg.port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range");
  return cfg;
}

GatewayConfig GatewayConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open gateway config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

}  // namespace qdt
