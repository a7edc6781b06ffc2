/*
 * Copyright 2026 The fairspectral Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairspectral::cli {

// Bad config text, unknown keys or unparsable values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// section -> key -> raw value. Keys before any section header land in "".
using IniDocument = std::map<std::string, std::map<std::string, std::string>>;

// `key = value` lines under `[section]` headers; `#` and `;` start comments.
IniDocument ParseIni(const std::string& text);
IniDocument ReadIniFile(const std::string& path);

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
};

// Keys, defaults and help text accepted by `command`.
const std::vector<KeySpec>& SchemaFor(const std::string& command);
std::vector<std::string> Commands();

// The effective configuration of one command: schema defaults, then the
// command's section of the file, then `key=value` overrides.
class RunConfig {
 public:
  static RunConfig Resolve(const std::string& command, const IniDocument& file,
                           const std::vector<std::string>& overrides);

  const std::string& command() const { return command_; }

  std::string str(const std::string& key) const;
  double real(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  bool flag(const std::string& key) const;
  // Comma-separated unsigned integers; the token `n` becomes `n_value`.
  std::vector<std::size_t> counts(const std::string& key, std::size_t n_value = 0) const;

  // Sorted `key = value` lines under a `[command]` header. Re-reading this
  // text resolves to the same configuration.
  std::string Canonical() const;
  // FNV-1a of Canonical(), 16 hex digits.
  std::string Hash() const;

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

}  // namespace fairspectral::cli
