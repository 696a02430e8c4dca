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

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, ErrorCode code, const std::string& message) {
  send(res, status, {{"error", {{"code", to_string(code)}, {"message", message}}}});
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotReady: return 503;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse: return 400;
    default: return 500;
  }
}

std::optional<std::uint64_t> parse_seq(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  const std::string raw = req.get_param_value(name);
  if (raw.empty() || raw.find_first_not_of("0123456789") != std::string::npos || raw.size() > 19) {
    throw Error(ErrorCode::kInvalidArgument, std::string("invalid '") + name + "' parameter: " + raw);
  }
  return std::stoull(raw);
}

}  // namespace

struct GatewayServer::Impl {
  std::shared_ptr<QueryGateway> gateway;
  httplib::Server server;
  std::thread thread;
};

GatewayServer::GatewayServer(std::shared_ptr<QueryGateway> gateway) : impl_(std::make_unique<Impl>()) {
  impl_->gateway = std::move(gateway);
  auto& server = impl_->server;
  QueryGateway* gw = impl_->gateway.get();
  // Plain SO_REUSEADDR; no SO_REUSEPORT, so a taken port fails to bind.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  server.Post("/v1/query", [gw](const httplib::Request& req, httplib::Response& res) {
    QueryRequest request;
    try {
      const json body = json::parse(req.body);
      if (!body.is_object() || !body.contains("sql") || !body.at("sql").is_string()) {
        throw Error(ErrorCode::kInvalidArgument, "request body must be an object with a string 'sql'");
      }
      request.sql = body.at("sql").get<std::string>();
      if (body.contains("session_id")) {
        const auto& sid = body.at("session_id");
        request.session_id = sid.is_string() ? sid.get<std::string>() : sid.dump();
      }
    } catch (const std::exception& e) {
      gw->record_error("", req.body, std::string("malformed request: ") + e.what());
      send_error(res, 400, ErrorCode::kInvalidArgument, std::string("malformed request: ") + e.what());
      return;
    }
    try {
      send(res, 200, gw->handle_query(request).to_json());
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, ErrorCode::kInternal, e.what());
    }
  });

  server.Get("/v1/schema", [gw](const httplib::Request&, httplib::Response& res) {
    try {
      send(res, 200, gw->handle_schema());
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), e.code(), e.what());
    }
  });

  server.Get("/v1/audit", [gw](const httplib::Request& req, httplib::Response& res) {
    try {
      json entries = json::array();
      for (const auto& e : gw->handle_audit(parse_seq(req, "from"), parse_seq(req, "to"))) {
        entries.push_back(e.to_json());
      }
      send(res, 200, {{"entries", std::move(entries)}});
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), e.code(), e.what());
    }
  });

  server.Get("/v1/health", [gw](const httplib::Request&, httplib::Response& res) {
    if (gw->ready()) {
      send(res, 200, {{"status", "ready"}});
    } else {
      send(res, 503, {{"status", "not_ready"}});
    }
  });
}

GatewayServer::~GatewayServer() { stop(); }

int GatewayServer::start(const std::string& host, int port) {
  auto& server = impl_->server;
  if (port == 0) {
    port_ = server.bind_to_any_port(host);
    if (port_ <= 0) throw Error(ErrorCode::kIo, "cannot bind " + host + " to any port");
  } else {
    if (!server.bind_to_port(host, port)) {
      throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
    }
    port_ = port;
  }
  impl_->thread = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return port_;
}

void GatewayServer::stop() {
  if (!impl_) return;
  if (impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

}  // namespace qdt
