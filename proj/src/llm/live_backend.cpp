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

#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "qdt/error.hpp"
#include "qdt/llm.hpp"

namespace qdt {

using nlohmann::json;

LiveBackend::LiveBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint must be an absolute URL: " + config_.endpoint);
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  origin_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
}

ChatMessage LiveBackend::complete(const std::vector<ChatMessage>& history) const {
  const char* key = nullptr;
  if (!config_.api_key_env.empty()) {
    key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) {
      throw Error(ErrorCode::kInvalidArgument, "environment variable " + config_.api_key_env + " is not set");
    }
  }
  json body = config_.parameters.is_object() ? config_.parameters : json::object();
  body["model"] = config_.model;
  json messages = json::array();
  for (const auto& m : history) messages.push_back(message_to_json(m));
  body["messages"] = std::move(messages);
  const std::string payload = body.dump();

  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
  const auto usecs = (config_.timeout.count() % 1000) * 1000;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1 << (attempt - 1)));
    httplib::Client client(origin_);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    if (key) client.set_bearer_token_auth(key);
    auto result = client.Post(path_, payload, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status == 429 || result->status >= 500) {
      last_error = "HTTP " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200) {
      throw Error(ErrorCode::kTransport, "chat endpoint returned HTTP " + std::to_string(result->status) + ": " +
                                             result->body.substr(0, 500));
    }
    try {
      const json reply = json::parse(result->body);
      const auto& content = reply.at("choices").at(0).at("message").at("content");
      return {"assistant", content.is_string() ? content.get<std::string>() : std::string()};
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kTransport, std::string("malformed chat response: ") + e.what());
    }
  }
  throw Error(ErrorCode::kTransport, "chat endpoint unreachable after " + std::to_string(config_.max_retries + 1) +
                                         " attempts: " + last_error);
}

}  // namespace qdt
