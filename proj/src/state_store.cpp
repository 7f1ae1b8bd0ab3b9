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

#include "gridops/state_store.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "gridops/core.hpp"

namespace gridops::service {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view log_file_name(Log log) {
  switch (log) {
    case Log::Journal: return "journal.jsonl";
    case Log::ProbeResults: return "probe_results.jsonl";
    case Log::Alarms: return "alarms.jsonl";
    case Log::Tickets: return "tickets.jsonl";
    case Log::Usage: return "usage.jsonl";
  }
  return "unknown.jsonl";
}

namespace {

void atomic_write(const fs::path& target, const std::string& body) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    out << body;
    if (!out) raise(ErrorCode::InvalidArgument, fmt::format("failed to write {}", tmp.string()));
  }
  fs::rename(tmp, target);
}

}  // namespace

StateStore::StateStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(*dir_ / "snapshots", ec);
  if (ec) raise(ErrorCode::InvalidArgument, fmt::format("cannot create data directory {}: {}", dir_->string(), ec.message()));
}

fs::path StateStore::path_of(Log log) const { return *dir_ / std::string(log_file_name(log)); }

bool StateStore::has_scenario() const {
  if (!dir_) return scenario_.has_value();
  return fs::exists(*dir_ / "scenario.json");
}

std::optional<json> StateStore::read_scenario() const {
  if (!dir_) return scenario_;
  std::ifstream in(*dir_ / "scenario.json");
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, fmt::format("scenario.json: {}", e.what()));
  }
}

void StateStore::write_scenario(const json& scenario) {
  if (!dir_) {
    scenario_ = scenario;
    return;
  }
  atomic_write(*dir_ / "scenario.json", scenario.dump(2));
}

void StateStore::append(Log log, const json& line) { append_all(log, std::span<const json>(&line, 1)); }

void StateStore::append_all(Log log, std::span<const json> lines) {
  if (lines.empty()) return;
  if (!dir_) {
    auto& mem = memory_[log];
    mem.insert(mem.end(), lines.begin(), lines.end());
    return;
  }
  std::string buffer;
  for (const auto& l : lines) {
    buffer += l.dump();
    buffer += '\n';
  }
  std::ofstream out(path_of(log), std::ios::app | std::ios::binary);
  out << buffer;
  out.flush();
  if (!out) raise(ErrorCode::InvalidArgument, fmt::format("failed to append to {}", path_of(log).string()));
}

std::vector<json> StateStore::read(Log log) const {
  if (!dir_) {
    auto it = memory_.find(log);
    return it == memory_.end() ? std::vector<json>{} : it->second;
  }
  std::vector<json> out;
  std::ifstream in(path_of(log), std::ios::binary);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (in.eof()) {
      // No trailing newline: the writer died mid-line.
      auto parsed = json::parse(line, nullptr, false);
      if (!parsed.is_discarded()) out.push_back(std::move(parsed));
      break;
    }
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      raise(ErrorCode::ParseError, fmt::format("{}: {}", path_of(log).string(), e.what()));
    }
  }
  return out;
}

void StateStore::write_snapshot(const std::string& name, const std::string& body) {
  if (!dir_) {
    snapshots_[name] = body;
    return;
  }
  atomic_write(*dir_ / "snapshots" / name, body);
}

std::optional<std::string> StateStore::read_snapshot(const std::string& name) const {
  if (!dir_) {
    auto it = snapshots_.find(name);
    return it == snapshots_.end() ? std::nullopt : std::optional<std::string>(it->second);
  }
  std::ifstream in(*dir_ / "snapshots" / name, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace gridops::service
