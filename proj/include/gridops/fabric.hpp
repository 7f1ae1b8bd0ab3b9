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

// Simulated grid fabric: storage, compute and service nodes, a replica
// catalogue and an information system whose published view can be corrupted
// independently of the ground truth.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridops/core.hpp"

namespace gridops::fabric {

enum class NodeState { Up, Down, Degraded };

enum class FaultKind {
  FullReportsFree,
  OverstateFreeSpace,
  UnderreportUsed,
  InvalidJobCounts,
  StaleRecord,
  Unpublished,
};

/// Corruption applied to a resource's published record. The fault is active
/// once the clock reaches `since`.
///
/// magnitude semantics per kind:
///   FullReportsFree     absolute bytes; published free = max(magnitude, 1)
///   OverstateFreeSpace  published free = true free * (1 + magnitude)
///   UnderreportUsed     published used = true used * (1 - magnitude)
///   InvalidJobCounts    published counts = floor(true counts * (1 + magnitude))
///   StaleRecord         record frozen at injection, heartbeat pinned to `since`
///   Unpublished         record suppressed
struct FaultSpec {
  FaultKind kind = FaultKind::Unpublished;
  double magnitude = 0.0;
  Timestamp since = 0;
};

struct PhysicalFile {
  Bytes size = 0;
  UserId owner;
  Timestamp created = 0;
};

struct StorageNode {
  ResourceId id;
  std::string site;
  Bytes capacity = 0;
  std::map<std::string, PhysicalFile> files;  // keyed by physical file name
  NodeState state = NodeState::Up;
  std::optional<FaultSpec> publication_fault;

  Bytes used() const;
  Bytes free() const { return capacity - used(); }
};

struct ComputeNode {
  ResourceId id;
  std::string site;
  std::int64_t waiting = 0;
  std::int64_t running = 0;
  NodeState state = NodeState::Up;
  std::optional<FaultSpec> publication_fault;
};

/// WMS, file catalogue server and VOMS server.
struct ServiceNode {
  ResourceId id;
  ResourceKind kind = ResourceKind::WMS;
  std::string site;
  NodeState state = NodeState::Up;
  std::optional<FaultSpec> publication_fault;
};

struct Replica {
  ResourceId storage_id;
  std::string pfn;

  bool operator==(const Replica&) const = default;
  auto operator<=>(const Replica&) const = default;
};

struct CatalogueEntry {
  std::string lfn;
  UserId owner;
  Bytes size = 0;
  std::vector<Replica> replicas;

  bool operator==(const CatalogueEntry&) const = default;
};

struct InfoRecord {
  ResourceId id;
  ResourceKind kind = ResourceKind::SE;
  std::optional<Bytes> used;
  std::optional<Bytes> free;
  std::optional<std::int64_t> waiting;
  std::optional<std::int64_t> running;
  Timestamp heartbeat = 0;

  bool operator==(const InfoRecord&) const = default;
};

/// Immutable copy of what the information system publishes at one instant.
struct InfoSnapshot {
  Timestamp taken_at = 0;
  std::vector<InfoRecord> records;  // sorted by id, at most one per resource

  const InfoRecord* find(const ResourceId& id) const;
  bool operator==(const InfoSnapshot&) const = default;
};

struct PreloadedFile {
  std::string lfn;
  UserId owner;
  Bytes size = 0;
};

struct StorageDef {
  ResourceId id;
  std::string site;
  Bytes capacity = 0;
  std::vector<PreloadedFile> files;
};

struct ComputeDef {
  ResourceId id;
  std::string site;
  std::int64_t waiting = 0;
  std::int64_t running = 0;
};

struct ServiceDef {
  ResourceId id;
  ResourceKind kind = ResourceKind::WMS;
  std::string site;
};

struct FabricSpec {
  std::vector<StorageDef> storage;
  std::vector<ComputeDef> compute;
  std::vector<ServiceDef> services;
  std::optional<std::uint64_t> seed;
};

enum class EventKind { SetState, InjectFault, ClearFault, SetQueue };

struct ScenarioEvent {
  Timestamp at = 0;
  EventKind kind = EventKind::SetState;
  ResourceId resource;
  NodeState state = NodeState::Up;
  FaultSpec fault;
  std::int64_t waiting = 0;
  std::int64_t running = 0;
};

enum class ConsistencyMode { MakeZombie, MakeGhost };

/// Deterministic physical file name for a replica of `lfn` on `storage_id`.
std::string physical_name(std::string_view lfn, std::string_view storage_id);

class Fabric {
 public:
  /// Builds the fabric. Throws DuplicateId or StorageFull on bad specs.
  explicit Fabric(const FabricSpec& spec);

  Timestamp now() const { return now_; }

  /// Advances the logical clock and applies every scheduled event that has
  /// become due, in (due time, insertion order).
  Timestamp advance_clock(Timestamp minutes);

  void schedule(ScenarioEvent event);
  std::size_t pending_events() const { return pending_.size(); }

  void set_state(const ResourceId& id, NodeState state);
  void set_queue(const ResourceId& id, std::int64_t waiting, std::int64_t running);
  void inject_fault(const ResourceId& id, FaultSpec fault);
  void clear_fault(const ResourceId& id);

  struct WriteResult {
    CatalogueEntry entry;
    std::string pfn;
  };
  WriteResult write_file(const ResourceId& storage_id, const UserId& owner,
                         const std::string& lfn, Bytes size);

  /// Removes the catalogue entry together with the bytes of every replica it
  /// registers.
  void delete_entry(const std::string& lfn);

  /// Breaks one consistent (lfn, storage) pair.
  void corrupt_consistency(ConsistencyMode mode, const std::string& lfn,
                           const ResourceId& storage_id);
  /// Stores an unregistered file. Returns its physical name.
  std::string synthesize_zombie(const ResourceId& storage_id, const UserId& owner,
                                const std::string& name, Bytes size);
  /// Registers a replica that has no physical file behind it.
  void synthesize_ghost(const std::string& lfn, const UserId& owner, Bytes size,
                        const ResourceId& storage_id);

  /// Stores a copy of the replica of `lfn` held on `from` onto `to` and
  /// registers it. Either both happen or neither does.
  void copy_replica(const std::string& lfn, const ResourceId& from, const ResourceId& to);
  /// Deregisters and removes the replica of `lfn` on `storage_id`. Both or neither.
  void remove_replica(const std::string& lfn, const ResourceId& storage_id);

  /// Reason a write of `size` bytes would be refused, or nullopt if it would succeed.
  std::optional<Error> check_writable(const ResourceId& storage_id, Bytes size) const;

  InfoSnapshot publish_info() const;

  const std::map<ResourceId, StorageNode>& storage() const { return storage_; }
  const std::map<ResourceId, ComputeNode>& compute() const { return compute_; }
  const std::map<ResourceId, ServiceNode>& services() const { return services_; }
  const std::map<std::string, CatalogueEntry>& catalogue() const { return catalogue_; }
  std::vector<CatalogueEntry> catalogue_entries() const;

  std::optional<ResourceKind> kind_of(const ResourceId& id) const;
  bool contains(const ResourceId& id) const { return kind_of(id).has_value(); }
  NodeState state_of(const ResourceId& id) const;
  const std::optional<FaultSpec>& fault_of(const ResourceId& id) const;

 private:
  struct Pending {
    ScenarioEvent event;
    std::uint64_t seq = 0;
  };

  void apply(const ScenarioEvent& event);
  std::optional<FaultSpec>& fault_slot(const ResourceId& id);
  StorageNode& storage_node(const ResourceId& id);
  InfoRecord truth_record(const ResourceId& id) const;
  std::optional<InfoRecord> published_record(const ResourceId& id) const;

  Timestamp now_ = 0;
  std::map<ResourceId, StorageNode> storage_;
  std::map<ResourceId, ComputeNode> compute_;
  std::map<ResourceId, ServiceNode> services_;
  std::map<std::string, CatalogueEntry> catalogue_;
  std::map<ResourceId, InfoRecord> frozen_;  // StaleRecord captures
  std::vector<Pending> pending_;
  std::uint64_t next_seq_ = 0;
};

/// Parameters for a randomly populated fabric. Same parameters, same fabric.
struct GeneratorParams {
  std::size_t storage = 0;
  std::size_t compute = 0;
  std::size_t workload = 0;
  bool catalogue_and_voms = true;
  std::size_t users = 8;
  std::size_t files_per_storage = 0;
  Bytes min_capacity = 10 * kTB;
  Bytes max_capacity = 100 * kTB;
  Bytes min_file = 1 * kGB;
  Bytes max_file = 50 * kGB;
  std::uint64_t seed = 1;
};

FabricSpec generate_spec(const GeneratorParams& params);

std::string_view to_string(NodeState state);
std::string_view to_string(FaultKind kind);
std::string_view to_string(EventKind kind);
NodeState node_state_from_string(std::string_view text);
FaultKind fault_kind_from_string(std::string_view text);
EventKind event_kind_from_string(std::string_view text);

void to_json(nlohmann::json& j, const FaultSpec& f);
void from_json(const nlohmann::json& j, FaultSpec& f);
void to_json(nlohmann::json& j, const InfoRecord& r);
void from_json(const nlohmann::json& j, InfoRecord& r);
void to_json(nlohmann::json& j, const InfoSnapshot& s);
void from_json(const nlohmann::json& j, InfoSnapshot& s);
void to_json(nlohmann::json& j, const CatalogueEntry& e);
void from_json(const nlohmann::json& j, CatalogueEntry& e);
void to_json(nlohmann::json& j, const FabricSpec& s);
void from_json(const nlohmann::json& j, FabricSpec& s);
void to_json(nlohmann::json& j, const ScenarioEvent& e);
void from_json(const nlohmann::json& j, ScenarioEvent& e);

}  // namespace gridops::fabric
