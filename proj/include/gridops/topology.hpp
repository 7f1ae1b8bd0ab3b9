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

// VO resource topology: the static registry view merged with the dynamic
// information-system view, plus scheduled downtimes.

#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridops/core.hpp"
#include "gridops/fabric.hpp"

namespace gridops::topology {

enum class Presence { RegisteredAndPublished, RegisteredOnly, PublishedOnly };

struct RegistryEntry {
  ResourceId id;
  ResourceKind kind = ResourceKind::SE;
  std::string site;
  bool in_production = true;
};

struct DowntimeWindow {
  ResourceId id;
  Timestamp start = 0;
  Timestamp end = 0;  // exclusive
  std::string reason;

  bool covers(Timestamp t) const { return start <= t && t < end; }
};

struct Member {
  ResourceId id;
  ResourceKind kind = ResourceKind::SE;
  Presence presence = Presence::RegisteredAndPublished;

  bool operator==(const Member&) const = default;
};

struct VOResourceSet {
  Timestamp computed_at = 0;
  std::vector<Member> members;  // sorted by id, ids unique

  const Member* find(const ResourceId& id) const;
  std::vector<ResourceId> ids(ResourceKind kind) const;
};

struct TopologyDiff {
  std::vector<ResourceId> added;
  std::vector<ResourceId> removed;
  std::vector<ResourceId> presence_changed;

  bool empty() const { return added.empty() && removed.empty() && presence_changed.empty(); }
};

/// Every production resource seen by either view appears exactly once.
/// Non-production registry entries are dropped even when published.
VOResourceSet merge_topology(std::span<const RegistryEntry> registry,
                             const fabric::InfoSnapshot& snapshot, Timestamp at);

std::set<ResourceId> active_downtimes(std::span<const DowntimeWindow> windows, Timestamp at);

TopologyDiff diff_topology(const VOResourceSet& before, const VOResourceSet& after);

/// Registry listing every fabric resource as in production.
std::vector<RegistryEntry> registry_from_fabric(const fabric::Fabric& fabric);

DowntimeWindow make_downtime(ResourceId id, Timestamp start, Timestamp end, std::string reason = {});

std::string_view to_string(Presence presence);
Presence presence_from_string(std::string_view text);

void to_json(nlohmann::json& j, const RegistryEntry& e);
void from_json(const nlohmann::json& j, RegistryEntry& e);
void to_json(nlohmann::json& j, const DowntimeWindow& w);
void from_json(const nlohmann::json& j, DowntimeWindow& w);

/// VO feed document, stable key order.
nlohmann::ordered_json to_feed(const VOResourceSet& set);
VOResourceSet vo_set_from_feed(const nlohmann::json& j);
nlohmann::ordered_json to_feed(const TopologyDiff& diff);

}  // namespace gridops::topology
