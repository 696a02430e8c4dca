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

#include <ctime>

#include "qdt/error.hpp"
#include "qdt/gateway.hpp"

namespace qdt {

using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(millis));
  return out;
}

}  // namespace

json AuditEntry::to_json() const {
  return {{"seq", seq},
          {"timestamp", timestamp},
          {"session_id", session_id},
          {"raw_sql", raw_sql},
          {"verdict", verdict},
          {"violation_codes", violation_codes},
          {"rewritten_sql", rewritten_sql},
          {"row_count", row_count},
          {"elapsed_ms", elapsed_ms},
          {"error", error}};
}

AuditEntry AuditEntry::from_json(const json& j) {
  AuditEntry e;
  try {
    e.seq = j.at("seq").get<std::uint64_t>();
    e.timestamp = j.value("timestamp", "");
    e.session_id = j.value("session_id", "");
    e.raw_sql = j.value("raw_sql", "");
    e.verdict = j.at("verdict").get<std::string>();
    e.violation_codes = j.value("violation_codes", std::vector<std::string>{});
    e.rewritten_sql = j.value("rewritten_sql", "");
    e.row_count = j.value("row_count", std::size_t{0});
    e.elapsed_ms = j.value("elapsed_ms", 0.0);
    e.error = j.value("error", "");
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("audit entry: ") + ex.what());
  }
  return e;
}

std::vector<AuditEntry> AuditLog::load(const std::filesystem::path& path) {
  std::vector<AuditEntry> entries;
  std::ifstream in(path);
  if (!in) return entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      entries.push_back(AuditEntry::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return entries;
}

AuditLog::AuditLog(std::filesystem::path path) : path_(std::move(path)) {
  entries_ = load(path_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].seq != i + 1) {
      throw Error(ErrorCode::kParse, "audit log " + path_.string() + " has a sequence gap at entry " +
                                         std::to_string(i + 1));
    }
  }
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::app);
  if (!out_) throw Error(ErrorCode::kIo, "cannot open audit log " + path_.string());
}

AuditEntry AuditLog::append(AuditEntry entry) {
  std::lock_guard lock(mutex_);
  entry.seq = entries_.size() + 1;
  entry.timestamp = utc_now();
  out_ << entry.to_json().dump() << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIo, "audit log write failed: " + path_.string());
  entries_.push_back(entry);
  return entry;
}

std::vector<AuditEntry> AuditLog::read(std::optional<std::uint64_t> from, std::optional<std::uint64_t> to) const {
  std::lock_guard lock(mutex_);
  std::vector<AuditEntry> out;
  for (const auto& e : entries_) {
    if (from && e.seq < *from) continue;
    if (to && e.seq > *to) break;
    out.push_back(e);
  }
  return out;
}

std::uint64_t AuditLog::last_seq() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace qdt
