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

#include "qdt/approval.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include "qdt/error.hpp"

namespace qdt {
namespace {

std::string to_hex(const unsigned char* data, std::size_t size) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(size * 2);
  for (std::size_t i = 0; i < size; ++i) {
    out += kDigits[data[i] >> 4];
    out += kDigits[data[i] & 0xf];
  }
  return out;
}

}  // namespace

ApprovalAuthority::ApprovalAuthority(std::string key) : key_(std::move(key)) {
  if (key_.empty()) throw Error(ErrorCode::kInvalidArgument, "approval key must not be empty");
}

std::shared_ptr<const ApprovalAuthority> ApprovalAuthority::generate() {
  unsigned char bytes[32];
  if (RAND_bytes(bytes, sizeof bytes) != 1) {
    throw Error(ErrorCode::kInternal, "RAND_bytes failed");
  }
  return std::make_shared<const ApprovalAuthority>(std::string(reinterpret_cast<char*>(bytes), sizeof bytes));
}

std::string ApprovalAuthority::sign(std::string_view sql) const {
  unsigned char mac[EVP_MAX_MD_SIZE];
  unsigned int mac_len = 0;
  if (!HMAC(EVP_sha256(), key_.data(), static_cast<int>(key_.size()),
            reinterpret_cast<const unsigned char*>(sql.data()), sql.size(), mac, &mac_len)) {
    throw Error(ErrorCode::kInternal, "HMAC failed");
  }
  return to_hex(mac, mac_len);
}

bool ApprovalAuthority::verify(std::string_view sql, std::string_view token) const {
  const std::string expected = sign(sql);
  return token.size() == expected.size() &&
         CRYPTO_memcmp(expected.data(), token.data(), expected.size()) == 0;
}

}  // namespace qdt
