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

#include "gridops/whitelist.hpp"

#include <fmt/format.h>

namespace gridops::topology {

namespace {

void validate(const WhitelistPolicy& policy) {
  if (!(policy.max_filling >= 0.0 && policy.max_filling <= 1.0))
    raise(ErrorCode::InvalidArgument, fmt::format("max_filling {} outside [0,1]", policy.max_filling));
  if (policy.alarm_lookback < 0) raise(ErrorCode::InvalidArgument, "alarm look-back must be >= 0");
}

}  // namespace

WhiteList compute_whitelist(const VOResourceSet& vo_set, const std::set<ResourceId>& downtimes_active,
                            const storage::FillingRateReport& filling, std::span<const probes::Alarm> alarms,
                            const WhitelistPolicy& policy) {
  validate(policy);
  const Timestamp at = vo_set.computed_at;
  const Timestamp horizon = at - policy.alarm_lookback;

  std::set<ResourceId> alarmed;
  for (const auto& a : alarms) {
    if (a.raised_at > at) continue;
    if (a.open() || *a.cleared_at >= horizon) alarmed.insert(a.resource);
  }

  WhiteList list;
  list.computed_at = at;
  list.criteria = policy;
  for (const auto& m : vo_set.members) {
    if (m.presence != Presence::RegisteredAndPublished) continue;
    // Catalogue and VOMS are VO-wide services, not placement targets.
    if (m.kind == ResourceKind::Catalogue || m.kind == ResourceKind::VOMS) continue;
    if (downtimes_active.contains(m.id) || alarmed.contains(m.id)) continue;
    if (m.kind == ResourceKind::SE) {
      const auto* entry = filling.find(m.id);
      if (!entry || entry->quality != storage::DataQuality::Ok || *entry->rate > policy.max_filling) continue;
    }
    list.members.insert(m.id);
  }
  return list;
}

nlohmann::ordered_json to_feed(const WhiteList& list) {
  nlohmann::ordered_json criteria;
  criteria["max_filling"] = list.criteria.max_filling;
  criteria["alarm_lookback"] = list.criteria.alarm_lookback;
  nlohmann::ordered_json out;
  out["computed_at"] = list.computed_at;
  out["criteria"] = std::move(criteria);
  out["members"] = list.members;
  return out;
}

void to_json(nlohmann::json& j, const WhitelistPolicy& p) {
  j = nlohmann::json{{"max_filling", p.max_filling}, {"alarm_lookback", p.alarm_lookback}};
}

void from_json(const nlohmann::json& j, WhitelistPolicy& p) {
  p.max_filling = j.value("max_filling", 0.80);
  p.alarm_lookback = j.value("alarm_lookback", Timestamp{1440});
  validate(p);
}

}  // namespace gridops::topology
