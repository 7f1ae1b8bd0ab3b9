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

// Storage auditing: filling rates, publication-error detection, heavy-user
// scans, catalogue/storage reconciliation, decommissioning and cleanup of
// departed users' files.

#pragma once

#include <functional>
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

namespace gridops::storage {

// Filling rates ---------------------------------------------------------------

enum class DataQuality { Ok, Suspect };

struct FillingEntry {
  ResourceId storage_id;
  std::optional<Bytes> published_used;
  std::optional<Bytes> published_free;
  std::optional<double> rate;  // absent when Suspect
  DataQuality quality = DataQuality::Ok;

  bool operator==(const FillingEntry&) const = default;
};

struct FillingRateReport {
  Timestamp taken_at = 0;
  std::vector<FillingEntry> entries;

  const FillingEntry* find(const ResourceId& id) const;
};

enum class SortMode { Rate, Id, Free };

/// rate = used / (used + free) from published figures. Zero denominators,
/// negative or missing fields make the entry Suspect.
FillingRateReport compute_filling_rates(const fabric::InfoSnapshot& snapshot);

/// Rate and Free sort descending, Id ascending. Suspect entries go last.
void sort_report(FillingRateReport& report, SortMode mode);
SortMode sort_mode_from_string(std::string_view text);

std::string filling_csv(const FillingRateReport& report);
nlohmann::ordered_json to_ordered_json(const FillingRateReport& report);

// Publication errors ------------------------------------------------------------

/// Ground-truth observation of one resource.
struct AuditSample {
  ResourceId id;
  ResourceKind kind = ResourceKind::SE;
  bool write_refused_full = false;
  std::optional<Bytes> used;
  std::optional<Bytes> free;
  std::optional<std::int64_t> waiting;
  std::optional<std::int64_t> running;
};

std::vector<AuditSample> audit_from_fabric(const fabric::Fabric& fabric);

enum class FindingKind {
  FullButReportsFree,
  FreeSpaceMismatch,
  UsedSpaceMismatch,
  NegativeOrMissingFields,
  StaleHeartbeat,
  InvalidJobCounts,
  MissingRecord,
};

struct Finding {
  ResourceId resource;
  FindingKind kind = FindingKind::FreeSpaceMismatch;
  std::string detail;

  bool operator==(const Finding&) const = default;
};

struct DetectionPolicy {
  double relative_tolerance = 0.05;
  Timestamp staleness_bound = 120;
};

std::vector<Finding> detect_publication_errors(const fabric::InfoSnapshot& snapshot,
                                               std::span<const AuditSample> audit,
                                               const DetectionPolicy& policy = {});

std::set<ResourceId> flagged_resources(std::span<const Finding> findings);
nlohmann::ordered_json to_ordered_json(std::span<const Finding> findings);

// Heavy users -------------------------------------------------------------------

struct HeavyUserEntry {
  ResourceId storage_id;
  UserId owner;
  Bytes bytes_owned = 0;
  int rank = 0;

  bool operator==(const HeavyUserEntry&) const = default;
};

struct HeavyUserScan {
  ResourceId storage_id;
  double rate = 0.0;
  std::vector<HeavyUserEntry> entries;
  std::string notification;
};

/// SEs whose published filling rate is strictly above `threshold`, each with
/// its top_n owners by catalogue-registered bytes and a notification text.
std::vector<HeavyUserScan> scan_heavy_users(const fabric::InfoSnapshot& snapshot,
                                            std::span<const fabric::CatalogueEntry> catalogue,
                                            double threshold = 0.80, std::size_t top_n = 10);

/// Every owner's registered bytes on one SE, ranked.
std::vector<HeavyUserEntry> owners_on(const ResourceId& storage_id,
                                      std::span<const fabric::CatalogueEntry> catalogue);

std::string render_notification(const ResourceId& storage_id, double rate,
                                 std::span<const HeavyUserEntry> entries);
std::string format_bytes(Bytes bytes);

nlohmann::ordered_json to_ordered_json(std::span<const HeavyUserScan> scans);

// Reconciliation ----------------------------------------------------------------

struct InventoryFile {
  std::string pfn;
  Bytes size = 0;
  UserId owner;

  auto operator<=>(const InventoryFile&) const = default;
};

using Inventories = std::map<ResourceId, std::set<InventoryFile>>;

Inventories inventories_from_fabric(const fabric::Fabric& fabric);

struct Zombie {
  ResourceId storage_id;
  std::string pfn;
  Bytes size = 0;
  UserId owner;

  auto operator<=>(const Zombie&) const = default;
};

struct Ghost {
  std::string lfn;
  ResourceId storage_id;
  std::string pfn;

  auto operator<=>(const Ghost&) const = default;
};

struct ReconciliationReport {
  Timestamp scanned_at = 0;
  std::vector<Zombie> zombies;  // sorted
  std::vector<Ghost> ghosts;    // sorted

  bool clean() const { return zombies.empty() && ghosts.empty(); }
};

ReconciliationReport reconcile(std::span<const fabric::CatalogueEntry> catalogue,
                               const Inventories& inventories, Timestamp scanned_at = 0);

nlohmann::ordered_json to_ordered_json(const ReconciliationReport& report);
std::string reconciliation_csv(const ReconciliationReport& report);

// Decommissioning ---------------------------------------------------------------

enum class Placement { MostFreeFirst, RoundRobin };
enum class PlanStatus { Draft, Running, Done, Aborted };

/// An empty `to` means the source replica is only dropped (the file keeps
/// replicas elsewhere).
struct MigrationStep {
  std::string lfn;
  ResourceId from;
  ResourceId to;
  Bytes size = 0;

  bool operator==(const MigrationStep&) const = default;
};

struct DecommissionPlan {
  std::string id;
  ResourceId source;
  std::vector<MigrationStep> steps;
  std::vector<std::string> unplaceable;
  std::vector<Zombie> zombies;  // preamble, never migrated
  PlanStatus status = PlanStatus::Draft;
  std::size_t completed = 0;
  std::optional<std::string> failure;
};

struct PlanOptions {
  Placement placement = Placement::MostFreeFirst;
  /// Drop source replicas of files that already have a replica elsewhere
  /// instead of copying them.
  bool skip_replicated = false;
  /// Restricts targets, typically to the whitelist.
  std::optional<std::set<ResourceId>> eligible_targets;
};

DecommissionPlan plan_decommission(const ResourceId& source, const topology::VOResourceSet& vo_set,
                                   const fabric::InfoSnapshot& snapshot,
                                   std::span<const fabric::CatalogueEntry> catalogue,
                                   const Inventories& inventories, const PlanOptions& options = {});

struct MigrationHooks {
  /// Called before each step with the step index; may mutate the fabric.
  std::function<void(std::size_t, fabric::Fabric&)> before_step;
};

/// Applies the plan step by step. A failing step aborts the plan and leaves
/// the catalogue consistent with storage.
DecommissionPlan execute_migration(fabric::Fabric& fabric, DecommissionPlan plan,
                                   const MigrationHooks& hooks = {});

// Departed users ----------------------------------------------------------------

struct CleanupReport {
  std::vector<fabric::CatalogueEntry> deletions;
  Bytes bytes_reclaimable = 0;
};

CleanupReport cleanup_departed(std::span<const fabric::CatalogueEntry> catalogue,
                               const std::set<UserId>& members);

/// Deletes every listed entry through the catalogue. Returns the number removed.
std::size_t execute_cleanup(fabric::Fabric& fabric, const CleanupReport& report);

std::string_view to_string(DataQuality q);
std::string_view to_string(FindingKind kind);
std::string_view to_string(Placement p);
std::string_view to_string(PlanStatus s);
Placement placement_from_string(std::string_view text);
PlanStatus plan_status_from_string(std::string_view text);

nlohmann::ordered_json to_ordered_json(const DecommissionPlan& plan);
DecommissionPlan plan_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_ordered_json(const CleanupReport& report);

}  // namespace gridops::storage
