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

// "VO-certified reliable" whitelist: the topology refined by downtimes,
// filling rates and recent alarms.

#pragma once

#include <set>
#include <span>

#include "json.hpp"

#include "gridops/probes.hpp"
#include "gridops/storage_ops.hpp"
#include "gridops/topology.hpp"

namespace gridops::topology {

struct WhitelistPolicy {
  double max_filling = 0.80;
  Timestamp alarm_lookback = 1440;
};

struct WhiteList {
  Timestamp computed_at = 0;
  std::set<ResourceId> members;
  WhitelistPolicy criteria;
};

/// An SE, CE or WMS is whitelisted iff it is registered and published, not in an
/// active downtime, has no alarm open or cleared within the look-back window
/// and, for SEs, has a trustworthy filling rate <= policy.max_filling.
WhiteList compute_whitelist(const VOResourceSet& vo_set, const std::set<ResourceId>& downtimes_active,
                            const storage::FillingRateReport& filling, std::span<const probes::Alarm> alarms,
                            const WhitelistPolicy& policy = {});

nlohmann::ordered_json to_feed(const WhiteList& list);

void to_json(nlohmann::json& j, const WhitelistPolicy& p);
void from_json(const nlohmann::json& j, WhitelistPolicy& p);

}  // namespace gridops::topology
