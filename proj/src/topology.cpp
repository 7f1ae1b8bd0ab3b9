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

#include "gridops/topology.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

namespace gridops::topology {

const Member* VOResourceSet::find(const ResourceId& id) const {
  auto it = std::lower_bound(members.begin(), members.end(), id,
                             [](const Member& m, const ResourceId& key) { return m.id < key; });
  if (it == members.end() || it->id != id) return nullptr;
  return &*it;
}

std::vector<ResourceId> VOResourceSet::ids(ResourceKind kind) const {
  std::vector<ResourceId> out;
  for (const auto& m : members) {
    if (m.kind == kind) out.push_back(m.id);
  }
  return out;
}

VOResourceSet merge_topology(std::span<const RegistryEntry> registry,
                             const fabric::InfoSnapshot& snapshot, Timestamp at) {
  std::map<ResourceId, const RegistryEntry*> registered;
  std::set<ResourceId> retired;
  for (const auto& entry : registry) {
    if (registered.contains(entry.id) || retired.contains(entry.id)) continue;
    if (entry.in_production) {
      registered.emplace(entry.id, &entry);
    } else {
      retired.insert(entry.id);
    }
  }

  std::map<ResourceId, Member> merged;
  for (const auto& [id, entry] : registered) {
    merged.emplace(id, Member{id, entry->kind, Presence::RegisteredOnly});
  }
  for (const auto& record : snapshot.records) {
    if (retired.contains(record.id)) continue;
    auto it = merged.find(record.id);
    if (it != merged.end()) {
      it->second.presence = Presence::RegisteredAndPublished;
    } else {
      merged.emplace(record.id, Member{record.id, record.kind, Presence::PublishedOnly});
    }
  }

  VOResourceSet set;
  set.computed_at = at;
  set.members.reserve(merged.size());
  for (auto& [id, member] : merged) set.members.push_back(std::move(member));
  return set;
}

std::set<ResourceId> active_downtimes(std::span<const DowntimeWindow> windows, Timestamp at) {
  std::set<ResourceId> out;
  for (const auto& w : windows) {
    if (w.covers(at)) out.insert(w.id);
  }
  return out;
}

TopologyDiff diff_topology(const VOResourceSet& before, const VOResourceSet& after) {
  TopologyDiff diff;
  for (const auto& m : after.members) {
    const Member* old = before.find(m.id);
    if (!old) {
      diff.added.push_back(m.id);
    } else if (old->presence != m.presence) {
      diff.presence_changed.push_back(m.id);
    }
  }
  for (const auto& m : before.members) {
    if (!after.find(m.id)) diff.removed.push_back(m.id);
  }
  return diff;
}

std::vector<RegistryEntry> registry_from_fabric(const fabric::Fabric& fabric) {
  std::vector<RegistryEntry> out;
  for (const auto& [id, node] : fabric.storage()) out.push_back({id, ResourceKind::SE, node.site, true});
  for (const auto& [id, node] : fabric.compute()) out.push_back({id, ResourceKind::CE, node.site, true});
  for (const auto& [id, node] : fabric.services()) out.push_back({id, node.kind, node.site, true});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

DowntimeWindow make_downtime(ResourceId id, Timestamp start, Timestamp end, std::string reason) {
  if (!(start < end))
    raise(ErrorCode::InvalidArgument, fmt::format("downtime for {} must satisfy start < end", id));
  return DowntimeWindow{std::move(id), start, end, std::move(reason)};
}

std::string_view to_string(Presence presence) {
  switch (presence) {
    case Presence::RegisteredAndPublished: return "RegisteredAndPublished";
    case Presence::RegisteredOnly: return "RegisteredOnly";
    case Presence::PublishedOnly: return "PublishedOnly";
  }
  return "?";
}

Presence presence_from_string(std::string_view text) {
  for (auto p : {Presence::RegisteredAndPublished, Presence::RegisteredOnly, Presence::PublishedOnly}) {
    if (to_string(p) == text) return p;
  }
  raise(ErrorCode::InvalidArgument, fmt::format("unknown presence '{}'", text));
}

using nlohmann::json;
using nlohmann::ordered_json;

void to_json(json& j, const RegistryEntry& e) {
  j = json{{"id", e.id}, {"kind", to_string(e.kind)}, {"site", e.site}, {"in_production", e.in_production}};
}

void from_json(const json& j, RegistryEntry& e) {
  e.id = j.at("id").get<std::string>();
  e.kind = resource_kind_from_string(j.at("kind").get<std::string>());
  e.site = j.value("site", std::string{});
  e.in_production = j.value("in_production", true);
}

void to_json(json& j, const DowntimeWindow& w) {
  j = json{{"id", w.id}, {"start", w.start}, {"end", w.end}, {"reason", w.reason}};
}

void from_json(const json& j, DowntimeWindow& w) {
  w = make_downtime(j.at("id").get<std::string>(), j.at("start").get<Timestamp>(),
                    j.at("end").get<Timestamp>(), j.value("reason", std::string{}));
}

ordered_json to_feed(const VOResourceSet& set) {
  ordered_json members = ordered_json::array();
  for (const auto& m : set.members) {
    ordered_json row;
    row["id"] = m.id;
    row["kind"] = to_string(m.kind);
    row["presence"] = to_string(m.presence);
    members.push_back(std::move(row));
  }
  ordered_json out;
  out["computed_at"] = set.computed_at;
  out["members"] = std::move(members);
  return out;
}

VOResourceSet vo_set_from_feed(const json& j) {
  VOResourceSet set;
  set.computed_at = j.at("computed_at").get<Timestamp>();
  for (const auto& m : j.at("members")) {
    set.members.push_back(Member{m.at("id").get<std::string>(),
                                 resource_kind_from_string(m.at("kind").get<std::string>()),
                                 presence_from_string(m.at("presence").get<std::string>())});
  }
  std::sort(set.members.begin(), set.members.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return set;
}

ordered_json to_feed(const TopologyDiff& diff) {
  ordered_json out;
  out["added"] = diff.added;
  out["removed"] = diff.removed;
  out["presence_changed"] = diff.presence_changed;
  return out;
}

}  // namespace gridops::topology
