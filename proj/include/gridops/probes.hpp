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

// Probe execution against the fabric, alarm hysteresis and per-VO
// availability / reliability reporting.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridops/core.hpp"
#include "gridops/fabric.hpp"
#include "gridops/topology.hpp"

namespace gridops::probes {

enum class Check { SEReadWrite, CESubmit, WMSPing, CatalogueLookup, VOMSPing };
enum class Outcome { Ok, Fail };

struct ProbeSpec {
  ResourceKind kind = ResourceKind::SE;
  Check check = Check::SEReadWrite;
  Timestamp interval = 30;
};

struct ProbeResult {
  ResourceId resource;
  Check check = Check::SEReadWrite;
  Timestamp at = 0;
  Outcome outcome = Outcome::Ok;
  std::string detail;

  bool operator==(const ProbeResult&) const = default;
};

struct Alarm {
  std::string id;
  ResourceId resource;
  Check check = Check::SEReadWrite;
  Timestamp raised_at = 0;
  std::optional<Timestamp> cleared_at;
  int consecutive_failures = 0;
  std::optional<std::string> linked_ticket;

  bool open() const { return !cleared_at.has_value(); }
  bool operator==(const Alarm&) const = default;
};

struct AlarmPolicy {
  int raise_after = 3;
  int clear_after = 2;
};

/// Alarms plus the per-(resource, check) run lengths needed to continue
/// evaluating them incrementally.
struct AlarmBook {
  struct Streak {
    int failures = 0;
    int successes = 0;

    bool operator==(const Streak&) const = default;
  };

  std::vector<Alarm> alarms;
  std::map<std::pair<ResourceId, Check>, Streak> streaks;
  std::uint64_t next_id = 1;

  std::vector<Alarm> open_alarms() const;
  const Alarm* open_alarm(const ResourceId& resource, Check check) const;
  Alarm* find(const std::string& alarm_id);
  bool operator==(const AlarmBook&) const = default;
};

/// Default check for each resource kind.
Check default_check(ResourceKind kind);
ResourceKind kind_for(Check check);
std::vector<ProbeSpec> default_probe_specs(Timestamp interval = 30);

/// Runs one check against ground truth. Published figures are never consulted.
/// Throws UnknownResource if the resource is not part of the fabric.
ProbeResult run_probe(const fabric::Fabric& fabric, const ResourceId& resource, Check check);

/// One result per (vo_set member, matching spec) whose interval divides the
/// current clock, ordered by resource id then check.
std::vector<ProbeResult> probe_cycle(const fabric::Fabric& fabric, std::span<const ProbeSpec> specs,
                                     const topology::VOResourceSet& vo_set);

/// Feeds new results (in time order) through the hysteresis rule: raise on
/// the k-th consecutive Fail, clear on the m-th consecutive Ok.
AlarmBook evaluate_alarms(std::span<const ProbeResult> results, AlarmBook book, const AlarmPolicy& policy);

struct Figures {
  std::optional<double> availability;
  std::optional<double> reliability;
  std::size_t total = 0;
  std::size_t ok = 0;
  std::size_t failed_in_downtime = 0;
};

struct AvailabilityReport {
  TimeWindow window;
  std::map<ResourceId, Figures> per_resource;  // total == 0 means unknown
  Figures aggregate;                           // unweighted mean over known resources
};

/// availability = Ok / total; reliability = Ok / (total - Fails inside a
/// declared downtime). Results outside `scope` or the window are ignored.
AvailabilityReport availability_report(std::span<const ProbeResult> results,
                                       const std::set<ResourceId>& scope, TimeWindow window,
                                       std::span<const topology::DowntimeWindow> downtimes = {});

std::string availability_csv(const AvailabilityReport& report);

std::string_view to_string(Check check);
std::string_view to_string(Outcome outcome);
Check check_from_string(std::string_view text);

void to_json(nlohmann::json& j, const ProbeSpec& s);
void from_json(const nlohmann::json& j, ProbeSpec& s);
void to_json(nlohmann::json& j, const ProbeResult& r);
void from_json(const nlohmann::json& j, ProbeResult& r);
void to_json(nlohmann::json& j, const Alarm& a);
void from_json(const nlohmann::json& j, Alarm& a);

nlohmann::ordered_json to_ordered_json(const Alarm& a);
nlohmann::ordered_json to_ordered_json(const AvailabilityReport& report);

}  // namespace gridops::probes
