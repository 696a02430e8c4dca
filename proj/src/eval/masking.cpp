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

#include <cmath>
#include <random>

#include "qdt/error.hpp"
#include "qdt/eval.hpp"

namespace qdt {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Lemire's multiply-shift; portable where uniform_int_distribution is not.
std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

}  // namespace

void AblationConfig::validate() const {
  if (!(mask_fraction >= 0.0 && mask_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mask fraction must lie in [0, 1]");
  }
}

json AblationConfig::to_json() const { return {{"mask_fraction", mask_fraction}, {"seed", seed}}; }

std::size_t mask_count(std::size_t present, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(present) + 1e-9));
}

TestRecord mask_features(const TestRecord& record, const AblationConfig& cfg) {
  cfg.validate();
  const std::size_t remove = mask_count(record.present_features.size(), cfg.mask_fraction);
  if (remove == 0) return record;
  std::vector<std::string> keys;
  keys.reserve(record.present_features.size());
  for (const auto& [key, value] : record.present_features) keys.push_back(key);
  std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(fnv1a(record.record_id))));
  // Partial Fisher-Yates: the first `remove` slots are the masked set.
  for (std::size_t i = 0; i < remove; ++i) std::swap(keys[i], keys[i + bounded(rng, keys.size() - i)]);
  TestRecord masked = record;
  for (std::size_t i = 0; i < remove; ++i) masked.present_features.erase(keys[i]);
  return masked;
}

}  // namespace qdt
