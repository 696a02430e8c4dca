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

#ifndef QDT_APPROVAL_HPP_
#define QDT_APPROVAL_HPP_

#include <memory>
#include <string>
#include <string_view>

namespace qdt {

/// Issues and checks approval tokens: HMAC-SHA256 over the exact approved
/// SQL text under a secret key. The policy engine signs, the store verifies,
/// so nothing executes unless it went through the policy engine verbatim.
class ApprovalAuthority {
 public:
  explicit ApprovalAuthority(std::string key);

  /// A fresh authority with a random 256-bit key.
  static std::shared_ptr<const ApprovalAuthority> generate();

  std::string sign(std::string_view sql) const;
  bool verify(std::string_view sql, std::string_view token) const;

 private:
  std::string key_;
};

class PolicyEngine;

/// SQL text plus the token that authorizes it. Only PolicyEngine can mint one.
class ApprovedQuery {
 public:
  const std::string& sql() const { return sql_; }
  const std::string& token() const { return token_; }

 private:
  friend class PolicyEngine;
  ApprovedQuery(std::string sql, std::string token)
      : sql_(std::move(sql)), token_(std::move(token)) {}

  std::string sql_;
  std::string token_;
};

}  // namespace qdt

#endif  // QDT_APPROVAL_HPP_
