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

#include "gridops/scenario.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace gridops::service {

using nlohmann::json;

std::vector<probes::ProbeSpec> ScenarioConfig::effective_probes() const {
  return probes.empty() ? probes::default_probe_specs(scan_interval) : probes;
}

std::vector<topology::RegistryEntry> ScenarioConfig::effective_registry() const {
  if (registry) return *registry;
  std::vector<topology::RegistryEntry> out;
  for (const auto& d : fabric.storage) out.push_back({d.id, ResourceKind::SE, d.site, true});
  for (const auto& d : fabric.compute) out.push_back({d.id, ResourceKind::CE, d.site, true});
  for (const auto& d : fabric.services) out.push_back({d.id, d.kind, d.site, true});
  return out;
}

void validate(const ScenarioConfig& c) {
  if (c.scan_interval <= 0) raise(ErrorCode::InvalidArgument, "scan_interval must be > 0");
  if (c.duration < 0) raise(ErrorCode::InvalidArgument, "duration must be >= 0");
  if (!(c.heavy_user_threshold >= 0.0 && c.heavy_user_threshold <= 1.0))
    raise(ErrorCode::InvalidArgument, "heavy_user_threshold must be in [0,1]");
  if (c.heavy_user_top_n < 1) raise(ErrorCode::InvalidArgument, "heavy_user_top_n must be >= 1");
  if (!(c.whitelist_policy.max_filling >= 0.0 && c.whitelist_policy.max_filling <= 1.0))
    raise(ErrorCode::InvalidArgument, "whitelist max_filling must be in [0,1]");
  if (c.whitelist_policy.alarm_lookback < 0) raise(ErrorCode::InvalidArgument, "alarm_lookback must be >= 0");
  if (c.alarm_policy.raise_after < 1 || c.alarm_policy.clear_after < 1)
    raise(ErrorCode::InvalidArgument, "alarm thresholds must be >= 1");
  if (!(c.detection.relative_tolerance >= 0.0)) raise(ErrorCode::InvalidArgument, "tolerance must be >= 0");
  for (const auto& p : c.probes) {
    if (p.interval <= 0) raise(ErrorCode::InvalidArgument, "probe interval must be > 0");
  }
  if (c.shifts.shift_length_days < 1) raise(ErrorCode::InvalidArgument, "shift_length_days must be >= 1");
}

std::chrono::sys_days parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (std::sscanf(std::string(text).c_str(), "%d-%u-%u", &y, &m, &d) != 3)
    raise(ErrorCode::ParseError, fmt::format("bad date '{}' (want YYYY-MM-DD)", text));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) raise(ErrorCode::ParseError, fmt::format("invalid date '{}'", text));
  return std::chrono::sys_days{ymd};
}

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::FileNotFound, fmt::format("file not found: {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  try {
    if (j.contains("fabric_file")) {
      c.fabric = parse_json_file(base_dir / j.at("fabric_file").get<std::string>()).get<fabric::FabricSpec>();
    } else if (j.contains("fabric")) {
      c.fabric = j.at("fabric").get<fabric::FabricSpec>();
    }
    if (j.contains("registry")) c.registry = j.at("registry").get<std::vector<topology::RegistryEntry>>();
    c.events = j.value("events", std::vector<fabric::ScenarioEvent>{});
    c.downtimes = j.value("downtimes", std::vector<topology::DowntimeWindow>{});
    c.probes = j.value("probes", std::vector<probes::ProbeSpec>{});
    if (j.contains("alarm_policy")) {
      c.alarm_policy.raise_after = j.at("alarm_policy").value("raise_after", 3);
      c.alarm_policy.clear_after = j.at("alarm_policy").value("clear_after", 2);
    }
    if (j.contains("whitelist_policy")) c.whitelist_policy = j.at("whitelist_policy").get<topology::WhitelistPolicy>();
    if (j.contains("detection")) {
      c.detection.relative_tolerance = j.at("detection").value("relative_tolerance", 0.05);
      c.detection.staleness_bound = j.at("detection").value("staleness_bound", Timestamp{120});
    }
    c.scan_interval = j.value("scan_interval", Timestamp{30});
    c.heavy_user_threshold = j.value("heavy_user_threshold", 0.80);
    c.heavy_user_top_n = j.value("heavy_user_top_n", std::size_t{10});
    c.duration = j.value("duration", Timestamp{0});
    c.seed = j.value("seed", std::uint64_t{1});
    c.usage = j.value("usage", std::vector<accounting::UsageRecord>{});
    if (j.contains("usage_csv")) {
      auto extra = accounting::parse_usage_csv(read_file(base_dir / j.at("usage_csv").get<std::string>()));
      c.usage.insert(c.usage.end(), extra.begin(), extra.end());
    }
    if (j.contains("members")) c.members = j.at("members").get<std::set<UserId>>();
    if (j.contains("shifts")) {
      const auto& s = j.at("shifts");
      c.shifts.teams = s.value("teams", std::vector<std::string>{});
      c.shifts.shift_length_days = s.value("shift_length_days", 7);
      if (s.contains("epoch")) c.shifts.epoch = parse_date(s.at("epoch").get<std::string>());
    }
    if (j.contains("calendar_epoch")) c.calendar_epoch = parse_date(j.at("calendar_epoch").get<std::string>());
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, fmt::format("scenario: {}", e.what()));
  }
  validate(c);
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["fabric"] = c.fabric;
  if (c.registry) j["registry"] = *c.registry;
  j["events"] = c.events;
  j["downtimes"] = c.downtimes;
  j["probes"] = c.probes;
  j["alarm_policy"] = json{{"raise_after", c.alarm_policy.raise_after}, {"clear_after", c.alarm_policy.clear_after}};
  j["whitelist_policy"] = c.whitelist_policy;
  j["detection"] = json{{"relative_tolerance", c.detection.relative_tolerance},
                        {"staleness_bound", c.detection.staleness_bound}};
  j["scan_interval"] = c.scan_interval;
  j["heavy_user_threshold"] = c.heavy_user_threshold;
  j["heavy_user_top_n"] = c.heavy_user_top_n;
  j["duration"] = c.duration;
  j["seed"] = c.seed;
  j["usage"] = c.usage;
  if (c.members) j["members"] = *c.members;
  j["shifts"] = json{{"teams", c.shifts.teams},
                     {"shift_length_days", c.shifts.shift_length_days},
                     {"epoch", format_date(c.shifts.epoch)}};
  j["calendar_epoch"] = format_date(c.calendar_epoch);
  return j;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) raise(ErrorCode::FileNotFound, fmt::format("file not found: {}", path.string()));
  return scenario_from_json(parse_json_file(path), path.parent_path());
}

}  // namespace gridops::service
