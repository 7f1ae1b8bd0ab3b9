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

// Scenario configuration: the fabric, its scheduled events and every policy
// knob of the monitoring pipeline.

#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <set>
#include <vector>

#include "json.hpp"

#include "gridops/accounting.hpp"
#include "gridops/fabric.hpp"
#include "gridops/incidents.hpp"
#include "gridops/probes.hpp"
#include "gridops/storage_ops.hpp"
#include "gridops/topology.hpp"
#include "gridops/whitelist.hpp"

namespace gridops::service {

struct ScenarioConfig {
  fabric::FabricSpec fabric;
  /// Defaults to every fabric resource, in production.
  std::optional<std::vector<topology::RegistryEntry>> registry;
  std::vector<fabric::ScenarioEvent> events;
  std::vector<topology::DowntimeWindow> downtimes;
  std::vector<probes::ProbeSpec> probes;  // empty: one default check per kind at scan_interval
  probes::AlarmPolicy alarm_policy;
  topology::WhitelistPolicy whitelist_policy;
  storage::DetectionPolicy detection;
  Timestamp scan_interval = 30;
  double heavy_user_threshold = 0.80;
  std::size_t heavy_user_top_n = 10;
  Timestamp duration = 0;
  std::uint64_t seed = 1;
  std::vector<accounting::UsageRecord> usage;
  std::optional<std::set<UserId>> members;
  incidents::ShiftSchedule shifts;
  std::chrono::sys_days calendar_epoch{};

  std::size_t planned_cycles() const { return static_cast<std::size_t>(duration / scan_interval); }
  std::vector<probes::ProbeSpec> effective_probes() const;
  std::vector<topology::RegistryEntry> effective_registry() const;
};

/// Throws InvalidArgument describing the first violated constraint.
void validate(const ScenarioConfig& config);

/// Parses a scenario document. Relative "fabric_file" and "usage_csv" paths
/// resolve against `base_dir`.
ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
/// Self-contained form: external files are inlined.
nlohmann::json scenario_to_json(const ScenarioConfig& config);

/// Throws FileNotFound or ParseError.
ScenarioConfig load_scenario(const std::filesystem::path& path);

std::chrono::sys_days parse_date(std::string_view text);
std::string format_date(std::chrono::sys_days day);

}  // namespace gridops::service
