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

#ifndef QDT_CLI_HPP_
#define QDT_CLI_HPP_

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace qdt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;

/// One resolved setting and where it came from.
struct SettingValue {
  std::string value;
  std::string source;  // "flag", "env QDT_X", "file <path>" or "default"
};

/// Layered configuration: flags > QDT_* environment > config file >
/// defaults. Relative paths from the config file resolve against its
/// directory.
class Settings {
 public:
  using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

  /// `config_path` empty means no file. Unknown keys in the file are an
  /// error.
  static Settings resolve(const std::map<std::string, std::string>& flags, const EnvLookup& env,
                          const std::string& config_path, const std::string& config_source);

  bool has(const std::string& key) const;
  /// Throws kInvalidArgument when unset.
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::map<std::string, SettingValue>& values() const { return values_; }

  /// "key = value  [source]" per line.
  void print(std::ostream& out) const;

  /// Environment variable name for a key: QDT_<KEY>.
  static std::string env_name(const std::string& key);
  /// Every key the tool understands, with its default (empty = none).
  static const std::map<std::string, std::string>& known_keys();

 private:
  std::map<std::string, SettingValue> values_;
};

/// Entry point behind the qdt binary. Returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qdt

#endif  // QDT_CLI_HPP_
