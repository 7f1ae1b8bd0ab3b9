// Copyright 2026 The gridops Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File-backed state: append-only JSON-lines logs plus latest report
// snapshots. Without a directory everything is kept in memory.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace gridops::service {

enum class Log { Journal, ProbeResults, Alarms, Tickets, Usage };

std::string_view log_file_name(Log log);

class StateStore {
 public:
  /// In-memory store.
  StateStore() = default;
  /// Store rooted at `dir`, created if missing.
  explicit StateStore(std::filesystem::path dir);

  bool persistent() const { return dir_.has_value(); }
  const std::optional<std::filesystem::path>& dir() const { return dir_; }

  bool has_scenario() const;
  std::optional<nlohmann::json> read_scenario() const;
  void write_scenario(const nlohmann::json& scenario);

  void append(Log log, const nlohmann::json& line);
  void append_all(Log log, std::span<const nlohmann::json> lines);
  /// Every complete line of the log. A torn trailing line is ignored.
  std::vector<nlohmann::json> read(Log log) const;
  std::size_t count(Log log) const { return read(log).size(); }

  void write_snapshot(const std::string& name, const std::string& body);
  std::optional<std::string> read_snapshot(const std::string& name) const;

 private:
  std::filesystem::path path_of(Log log) const;

  std::optional<std::filesystem::path> dir_;
  std::optional<nlohmann::json> scenario_;
  std::map<Log, std::vector<nlohmann::json>> memory_;
  std::map<std::string, std::string> snapshots_;
};

}  // namespace gridops::service
