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

// Shared fixtures for the test and acceptance binaries.

#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "gridops/accounting.hpp"
#include "gridops/fabric.hpp"
#include "gridops/incidents.hpp"
#include "gridops/scenario.hpp"
#include "gridops/probes.hpp"
#include "gridops/storage_ops.hpp"
#include "gridops/topology.hpp"
#include "gridops/whitelist.hpp"

namespace gridops::testing {

fabric::StorageDef se(const ResourceId& id, Bytes capacity, std::vector<fabric::PreloadedFile> files = {});
fabric::ComputeDef ce(const ResourceId& id, std::int64_t waiting = 0, std::int64_t running = 0);
fabric::ServiceDef svc(const ResourceId& id, ResourceKind kind);

/// Targets for the ticket corpus.
inline constexpr double kTargetDaysToSolve = 14.0;
inline constexpr double kTargetSteps = 10.0;
inline constexpr double kTargetPeople = 3.5;

/// `pairs` pairs of solved tickets built through the public lifecycle API.
/// Within a pair one ticket takes 10 days, 9 steps, 3 people and the other
/// 18 days, 11 steps, 4 people. Tickets open one per day from timestamp 0.
std::vector<incidents::Ticket> ticket_corpus(std::size_t pairs, std::uint64_t seed);

/// Records within [0, 1 year) whose cpu_hours sum to exactly `total`.
/// About a fifth carry no user identity.
std::vector<accounting::UsageRecord> usage_log(double total, std::size_t count, std::uint64_t seed);
inline constexpr Timestamp kYear = 365 * kMinutesPerDay;

/// Samples over several CEs summing to (39000 waiting, 10000 running).
std::vector<accounting::QueueSample> queue_fixture(std::uint64_t seed);

/// Monthly snapshots whose SE totals rise linearly from 1.2 PB to 2.0 PB used
/// against 3.7 PB capacity.
std::vector<fabric::InfoSnapshot> storage_growth_fixture(std::size_t points);

struct MisconfigScenario {
  service::ScenarioConfig config;
  std::set<ResourceId> injected;
  Timestamp onset = 0;
};

/// 108 SEs, 186 CEs and 36 WMSs; `faulted` SEs get a publication fault that
/// exceeds detection tolerances at `onset`.
MisconfigScenario misconfig_scenario(std::size_t faulted, std::uint64_t seed, Timestamp onset = 60);

/// Random small consistent fabric for migration and reconciliation runs.
fabric::FabricSpec random_small_fabric(std::mt19937_64& rng, std::size_t max_se, std::size_t max_files);

/// Reference reconciliation: nested loops over every catalogue replica and
/// every inventory file, no indexing.
storage::ReconciliationReport brute_force_reconcile(const std::vector<fabric::CatalogueEntry>& catalogue,
                                                    const storage::Inventories& inventories);

/// Sum of size over every registered replica.
Bytes registered_bytes(const fabric::Fabric& fabric);

/// Directory under the system temp dir, removed on destruction.
struct WhitelistCase {
  topology::VOResourceSet vo_set;
  std::vector<topology::DowntimeWindow> downtimes;
  storage::FillingRateReport filling;
  std::vector<probes::Alarm> alarms;
  topology::WhitelistPolicy policy;
};

WhitelistCase random_whitelist_case(std::mt19937_64& rng);
topology::WhiteList whitelist_of(const WhitelistCase& c);

struct MigrationRun {
  storage::PlanStatus status = storage::PlanStatus::Draft;
  bool reconciled_clean = false;
  Bytes registered_before = 0;
  Bytes registered_after = 0;
};

/// Plans and executes a decommission on a random fabric; about half the runs
/// take a target or the source down partway through.
MigrationRun random_migration_run(std::mt19937_64& rng);

class TempDir {
 public:
  explicit TempDir(const std::string& prefix);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace gridops::testing
