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

#include "httplib.h"
#include "qdt/error.hpp"
#include "qdt/gateway.hpp"

namespace qdt {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

httplib::Client make_client(const std::string& url, std::chrono::milliseconds timeout) {
  httplib::Client client(url);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                (timeout.count() % 1000) * 1000);
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                          (timeout.count() % 1000) * 1000);
  return client;
}

json checked_body(const httplib::Result& result, const std::string& what) {
  if (!result) {
    throw Error(ErrorCode::kTransport, what + ": " + httplib::to_string(result.error()));
  }
  json body;
  try {
    body = json::parse(result->body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::kTransport, what + ": HTTP " + std::to_string(result->status) + " with non-JSON body");
  }
  if (result->status != 200) {
    const std::string message = body.contains("error") ? body["error"].value("message", "") : result->body;
    ErrorCode code = ErrorCode::kTransport;
    if (result->status == 503) code = ErrorCode::kNotReady;
    if (result->status == 400) code = ErrorCode::kInvalidArgument;
    throw Error(code, what + ": HTTP " + std::to_string(result->status) + ": " + message);
  }
  return body;
}

}  // namespace

HttpGatewayClient::HttpGatewayClient(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

QueryResponse HttpGatewayClient::query(const QueryRequest& request) {
  auto client = make_client(base_url_, timeout_);
  const json body = {{"session_id", request.session_id}, {"sql", request.sql}};
  auto result = client.Post("/v1/query", body.dump(), kJson);
  return QueryResponse::from_json(checked_body(result, "gateway query"));
}

json HttpGatewayClient::schema() {
  auto client = make_client(base_url_, timeout_);
  return checked_body(client.Get("/v1/schema"), "gateway schema");
}

bool HttpGatewayClient::healthy() {
  auto client = make_client(base_url_, timeout_);
  auto result = client.Get("/v1/health");
  return result && result->status == 200;
}

}  // namespace qdt
