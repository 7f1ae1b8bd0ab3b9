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

#include "gridops/fabric.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <fmt/format.h>

namespace gridops::fabric {

namespace {

// FNV-1a, 64 bit.
std::uint64_t fnv1a(std::string_view data, std::uint64_t hash = 14695981039346656037ULL) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

Bytes scale_floor(Bytes value, double factor) {
  return static_cast<Bytes>(std::floor(static_cast<double>(value) * factor));
}

std::int64_t scale_floor_count(std::int64_t value, double factor) {
  return static_cast<std::int64_t>(std::floor(static_cast<double>(value) * factor));
}

}  // namespace

Bytes StorageNode::used() const {
  Bytes total = 0;
  for (const auto& [name, file] : files) total += file.size;
  return total;
}

const InfoRecord* InfoSnapshot::find(const ResourceId& id) const {
  auto it = std::lower_bound(records.begin(), records.end(), id,
                             [](const InfoRecord& r, const ResourceId& key) { return r.id < key; });
  if (it == records.end() || it->id != id) return nullptr;
  return &*it;
}

std::string physical_name(std::string_view lfn, std::string_view storage_id) {
  std::uint64_t h = fnv1a(lfn);
  h = fnv1a(std::string_view("\x1f", 1), h);
  h = fnv1a(storage_id, h);
  return fmt::format("pfn-{:016x}", h);
}

Fabric::Fabric(const FabricSpec& spec) {
  std::set<ResourceId> ids;
  auto claim = [&ids](const ResourceId& id) {
    if (id.empty()) raise(ErrorCode::InvalidArgument, "empty resource id");
    if (!ids.insert(id).second) raise(ErrorCode::DuplicateId, fmt::format("DuplicateId(\"{}\")", id));
  };
  for (const auto& def : spec.storage) {
    claim(def.id);
    if (def.capacity < 0) raise(ErrorCode::InvalidArgument, fmt::format("negative capacity on {}", def.id));
    storage_[def.id] = StorageNode{def.id, def.site, def.capacity, {}, NodeState::Up, std::nullopt};
  }
  for (const auto& def : spec.compute) {
    claim(def.id);
    if (def.waiting < 0 || def.running < 0)
      raise(ErrorCode::InvalidArgument, fmt::format("negative queue counts on {}", def.id));
    compute_[def.id] = ComputeNode{def.id, def.site, def.waiting, def.running, NodeState::Up, std::nullopt};
  }
  for (const auto& def : spec.services) {
    claim(def.id);
    if (def.kind == ResourceKind::SE || def.kind == ResourceKind::CE)
      raise(ErrorCode::InvalidArgument, fmt::format("service {} must be WMS, Catalogue or VOMS", def.id));
    services_[def.id] = ServiceNode{def.id, def.kind, def.site, NodeState::Up, std::nullopt};
  }
  for (const auto& def : spec.storage) {
    for (const auto& file : def.files) {
      if (file.size > storage_.at(def.id).free()) {
        raise(ErrorCode::StorageFull,
              fmt::format("preloaded file {} ({} bytes) exceeds capacity of {}", file.lfn, file.size, def.id));
      }
      write_file(def.id, file.owner, file.lfn, file.size);
    }
  }
}

Timestamp Fabric::advance_clock(Timestamp minutes) {
  if (minutes < 0) raise(ErrorCode::InvalidArgument, fmt::format("cannot advance clock by {} minutes", minutes));
  if (minutes == 0) return now_;
  const Timestamp target = now_ + minutes;

  std::vector<Pending> due;
  std::vector<Pending> later;
  for (auto& p : pending_) (p.event.at <= target ? due : later).push_back(std::move(p));
  pending_ = std::move(later);
  std::sort(due.begin(), due.end(), [](const Pending& a, const Pending& b) {
    return a.event.at != b.event.at ? a.event.at < b.event.at : a.seq < b.seq;
  });
  for (const auto& p : due) {
    now_ = std::max(now_, p.event.at);
    apply(p.event);
  }
  now_ = target;
  return now_;
}

void Fabric::schedule(ScenarioEvent event) {
  if (!contains(event.resource))
    raise(ErrorCode::UnknownResource, fmt::format("event targets unknown resource {}", event.resource));
  pending_.push_back(Pending{std::move(event), next_seq_++});
}

void Fabric::apply(const ScenarioEvent& event) {
  switch (event.kind) {
    case EventKind::SetState: set_state(event.resource, event.state); break;
    case EventKind::InjectFault: inject_fault(event.resource, event.fault); break;
    case EventKind::ClearFault: clear_fault(event.resource); break;
    case EventKind::SetQueue: set_queue(event.resource, event.waiting, event.running); break;
  }
}

std::optional<ResourceKind> Fabric::kind_of(const ResourceId& id) const {
  if (storage_.contains(id)) return ResourceKind::SE;
  if (compute_.contains(id)) return ResourceKind::CE;
  if (auto it = services_.find(id); it != services_.end()) return it->second.kind;
  return std::nullopt;
}

NodeState Fabric::state_of(const ResourceId& id) const {
  if (auto it = storage_.find(id); it != storage_.end()) return it->second.state;
  if (auto it = compute_.find(id); it != compute_.end()) return it->second.state;
  if (auto it = services_.find(id); it != services_.end()) return it->second.state;
  raise(ErrorCode::UnknownResource, fmt::format("unknown resource {}", id));
}

const std::optional<FaultSpec>& Fabric::fault_of(const ResourceId& id) const {
  return const_cast<Fabric*>(this)->fault_slot(id);
}

std::optional<FaultSpec>& Fabric::fault_slot(const ResourceId& id) {
  if (auto it = storage_.find(id); it != storage_.end()) return it->second.publication_fault;
  if (auto it = compute_.find(id); it != compute_.end()) return it->second.publication_fault;
  if (auto it = services_.find(id); it != services_.end()) return it->second.publication_fault;
  raise(ErrorCode::UnknownResource, fmt::format("unknown resource {}", id));
}

StorageNode& Fabric::storage_node(const ResourceId& id) {
  auto it = storage_.find(id);
  if (it == storage_.end()) raise(ErrorCode::UnknownResource, fmt::format("unknown storage element {}", id));
  return it->second;
}

void Fabric::set_state(const ResourceId& id, NodeState state) {
  if (auto it = storage_.find(id); it != storage_.end()) {
    it->second.state = state;
  } else if (auto ct = compute_.find(id); ct != compute_.end()) {
    ct->second.state = state == NodeState::Degraded ? NodeState::Down : state;
  } else if (auto st = services_.find(id); st != services_.end()) {
    st->second.state = state == NodeState::Degraded ? NodeState::Down : state;
  } else {
    raise(ErrorCode::UnknownResource, fmt::format("unknown resource {}", id));
  }
}

void Fabric::set_queue(const ResourceId& id, std::int64_t waiting, std::int64_t running) {
  auto it = compute_.find(id);
  if (it == compute_.end()) raise(ErrorCode::UnknownResource, fmt::format("unknown computing element {}", id));
  if (waiting < 0 || running < 0) raise(ErrorCode::InvalidArgument, "queue counts must be non-negative");
  it->second.waiting = waiting;
  it->second.running = running;
}

void Fabric::inject_fault(const ResourceId& id, FaultSpec fault) {
  auto& slot = fault_slot(id);
  if (!(fault.magnitude >= 0.0)) raise(ErrorCode::InvalidArgument, "fault magnitude must be >= 0");
  frozen_.erase(id);
  if (fault.kind == FaultKind::StaleRecord) {
    InfoRecord record = truth_record(id);
    record.heartbeat = fault.since;
    frozen_[id] = std::move(record);
  }
  slot = fault;
}

void Fabric::clear_fault(const ResourceId& id) {
  fault_slot(id).reset();
  frozen_.erase(id);
}

std::optional<Error> Fabric::check_writable(const ResourceId& storage_id, Bytes size) const {
  auto it = storage_.find(storage_id);
  if (it == storage_.end())
    return Error(ErrorCode::UnknownResource, fmt::format("unknown storage element {}", storage_id));
  const auto& node = it->second;
  if (node.state != NodeState::Up) return Error(ErrorCode::Unavailable, "unavailable");
  if (size < 0) return Error(ErrorCode::InvalidArgument, "negative size");
  if (node.free() < size) return Error(ErrorCode::StorageFull, "StorageFull");
  return std::nullopt;
}

Fabric::WriteResult Fabric::write_file(const ResourceId& storage_id, const UserId& owner,
                                       const std::string& lfn, Bytes size) {
  if (lfn.empty()) raise(ErrorCode::InvalidArgument, "empty logical file name");
  if (auto err = check_writable(storage_id, size)) throw *err;
  std::string pfn = physical_name(lfn, storage_id);
  auto& node = storage_node(storage_id);
  if (node.files.contains(pfn))
    raise(ErrorCode::AlreadyExists, fmt::format("{} already has a replica on {}", lfn, storage_id));
  auto entry_it = catalogue_.find(lfn);
  if (entry_it != catalogue_.end()) {
    if (entry_it->second.owner != owner)
      raise(ErrorCode::InvalidArgument, fmt::format("{} is owned by {}, not {}", lfn, entry_it->second.owner, owner));
    if (entry_it->second.size != size)
      raise(ErrorCode::InvalidArgument, fmt::format("{} has size {}, not {}", lfn, entry_it->second.size, size));
    for (const auto& r : entry_it->second.replicas) {
      if (r.storage_id == storage_id)
        raise(ErrorCode::AlreadyExists, fmt::format("{} already registered on {}", lfn, storage_id));
    }
  }

  node.files[pfn] = PhysicalFile{size, owner, now_};
  auto& entry = catalogue_[lfn];
  entry.lfn = lfn;
  entry.owner = owner;
  entry.size = size;
  entry.replicas.push_back(Replica{storage_id, pfn});
  return WriteResult{entry, pfn};
}

void Fabric::delete_entry(const std::string& lfn) {
  auto it = catalogue_.find(lfn);
  if (it == catalogue_.end()) raise(ErrorCode::NotFound, fmt::format("no catalogue entry for {}", lfn));
  for (const auto& r : it->second.replicas) {
    if (auto node = storage_.find(r.storage_id); node != storage_.end()) node->second.files.erase(r.pfn);
  }
  catalogue_.erase(it);
}

void Fabric::corrupt_consistency(ConsistencyMode mode, const std::string& lfn,
                                 const ResourceId& storage_id) {
  auto entry_it = catalogue_.find(lfn);
  if (entry_it == catalogue_.end()) raise(ErrorCode::NotFound, fmt::format("no catalogue entry for {}", lfn));
  auto& node = storage_node(storage_id);
  auto& replicas = entry_it->second.replicas;
  auto rep = std::find_if(replicas.begin(), replicas.end(),
                          [&](const Replica& r) { return r.storage_id == storage_id; });
  if (rep == replicas.end())
    raise(ErrorCode::NotFound, fmt::format("{} has no replica registered on {}", lfn, storage_id));
  if (!node.files.contains(rep->pfn))
    raise(ErrorCode::AlreadyInconsistent, fmt::format("({}, {}) is already inconsistent", lfn, storage_id));

  if (mode == ConsistencyMode::MakeGhost) {
    node.files.erase(rep->pfn);
    return;
  }
  replicas.erase(rep);
  if (replicas.empty()) catalogue_.erase(entry_it);
}

std::string Fabric::synthesize_zombie(const ResourceId& storage_id, const UserId& owner,
                                      const std::string& name, Bytes size) {
  auto& node = storage_node(storage_id);
  if (size < 0) raise(ErrorCode::InvalidArgument, "negative size");
  if (node.free() < size) raise(ErrorCode::StorageFull, "StorageFull");
  std::string pfn = physical_name(name, storage_id);
  if (node.files.contains(pfn)) raise(ErrorCode::AlreadyExists, fmt::format("{} already on {}", name, storage_id));
  node.files[pfn] = PhysicalFile{size, owner, now_};
  return pfn;
}

void Fabric::synthesize_ghost(const std::string& lfn, const UserId& owner, Bytes size,
                              const ResourceId& storage_id) {
  storage_node(storage_id);
  auto& entry = catalogue_[lfn];
  if (entry.lfn.empty()) {
    entry.lfn = lfn;
    entry.owner = owner;
    entry.size = size;
  }
  for (const auto& r : entry.replicas) {
    if (r.storage_id == storage_id)
      raise(ErrorCode::AlreadyExists, fmt::format("{} already registered on {}", lfn, storage_id));
  }
  entry.replicas.push_back(Replica{storage_id, physical_name(lfn, storage_id)});
}

void Fabric::copy_replica(const std::string& lfn, const ResourceId& from, const ResourceId& to) {
  auto entry_it = catalogue_.find(lfn);
  if (entry_it == catalogue_.end()) raise(ErrorCode::NotFound, fmt::format("no catalogue entry for {}", lfn));
  auto& entry = entry_it->second;
  auto& source = storage_node(from);
  auto rep = std::find_if(entry.replicas.begin(), entry.replicas.end(),
                          [&](const Replica& r) { return r.storage_id == from; });
  if (rep == entry.replicas.end())
    raise(ErrorCode::NotFound, fmt::format("{} has no replica on {}", lfn, from));
  auto file = source.files.find(rep->pfn);
  if (file == source.files.end())
    raise(ErrorCode::NotFound, fmt::format("replica of {} on {} has no physical file", lfn, from));
  if (source.state == NodeState::Down) raise(ErrorCode::Unavailable, fmt::format("source {} unavailable", from));
  if (auto err = check_writable(to, file->second.size)) throw *err;
  for (const auto& r : entry.replicas) {
    if (r.storage_id == to) raise(ErrorCode::AlreadyExists, fmt::format("{} already registered on {}", lfn, to));
  }
  std::string pfn = physical_name(lfn, to);
  auto& target = storage_node(to);
  if (target.files.contains(pfn)) raise(ErrorCode::AlreadyExists, fmt::format("{} already stored on {}", pfn, to));

  target.files[pfn] = PhysicalFile{file->second.size, file->second.owner, now_};
  entry.replicas.push_back(Replica{to, pfn});
}

void Fabric::remove_replica(const std::string& lfn, const ResourceId& storage_id) {
  auto entry_it = catalogue_.find(lfn);
  if (entry_it == catalogue_.end()) raise(ErrorCode::NotFound, fmt::format("no catalogue entry for {}", lfn));
  auto& node = storage_node(storage_id);
  auto& replicas = entry_it->second.replicas;
  auto rep = std::find_if(replicas.begin(), replicas.end(),
                          [&](const Replica& r) { return r.storage_id == storage_id; });
  if (rep == replicas.end())
    raise(ErrorCode::NotFound, fmt::format("{} has no replica on {}", lfn, storage_id));
  node.files.erase(rep->pfn);
  replicas.erase(rep);
  if (replicas.empty()) catalogue_.erase(entry_it);
}

std::vector<CatalogueEntry> Fabric::catalogue_entries() const {
  std::vector<CatalogueEntry> out;
  out.reserve(catalogue_.size());
  for (const auto& [lfn, entry] : catalogue_) out.push_back(entry);
  return out;
}

InfoRecord Fabric::truth_record(const ResourceId& id) const {
  InfoRecord record;
  record.id = id;
  record.heartbeat = now_;
  if (auto it = storage_.find(id); it != storage_.end()) {
    record.kind = ResourceKind::SE;
    record.used = it->second.used();
    record.free = it->second.free();
  } else if (auto ct = compute_.find(id); ct != compute_.end()) {
    record.kind = ResourceKind::CE;
    record.waiting = ct->second.waiting;
    record.running = ct->second.running;
  } else if (auto st = services_.find(id); st != services_.end()) {
    record.kind = st->second.kind;
  } else {
    raise(ErrorCode::UnknownResource, fmt::format("unknown resource {}", id));
  }
  return record;
}

std::optional<InfoRecord> Fabric::published_record(const ResourceId& id) const {
  const auto& fault = fault_of(id);
  InfoRecord record = truth_record(id);
  if (!fault || fault->since > now_) return record;

  const double m = fault->magnitude;
  switch (fault->kind) {
    case FaultKind::FullReportsFree:
      if (record.free) record.free = std::max<Bytes>(static_cast<Bytes>(m), 1);
      break;
    case FaultKind::OverstateFreeSpace:
      if (record.free) record.free = scale_floor(*record.free, 1.0 + m);
      break;
    case FaultKind::UnderreportUsed:
      if (record.used) record.used = scale_floor(*record.used, 1.0 - m);
      break;
    case FaultKind::InvalidJobCounts:
      if (record.waiting) record.waiting = scale_floor_count(*record.waiting, 1.0 + m);
      if (record.running) record.running = scale_floor_count(*record.running, 1.0 + m);
      break;
    case FaultKind::StaleRecord:
      if (auto it = frozen_.find(id); it != frozen_.end()) return it->second;
      break;
    case FaultKind::Unpublished:
      return std::nullopt;
  }
  return record;
}

InfoSnapshot Fabric::publish_info() const {
  InfoSnapshot snap;
  snap.taken_at = now_;
  auto add = [&](const ResourceId& id) {
    if (auto record = published_record(id)) snap.records.push_back(std::move(*record));
  };
  for (const auto& [id, node] : storage_) add(id);
  for (const auto& [id, node] : compute_) add(id);
  for (const auto& [id, node] : services_) add(id);
  std::sort(snap.records.begin(), snap.records.end(),
            [](const InfoRecord& a, const InfoRecord& b) { return a.id < b.id; });
  return snap;
}

FabricSpec generate_spec(const GeneratorParams& params) {
  std::mt19937_64 rng(params.seed);
  auto uniform = [&rng](Bytes lo, Bytes hi) {
    return std::uniform_int_distribution<Bytes>(lo, std::max(lo, hi))(rng);
  };
  FabricSpec spec;
  spec.seed = params.seed;
  const std::size_t sites = std::max<std::size_t>(1, (params.storage + params.compute) / 3);
  auto site_of = [sites](std::size_t i) { return fmt::format("SITE-{:03}", i % sites); };
  for (std::size_t i = 0; i < params.storage; ++i) {
    StorageDef def{fmt::format("SE-{:03}", i + 1), site_of(i), uniform(params.min_capacity, params.max_capacity), {}};
    Bytes used = 0;
    for (std::size_t f = 0; f < params.files_per_storage; ++f) {
      Bytes size = uniform(params.min_file, params.max_file);
      if (used + size > def.capacity) break;
      used += size;
      def.files.push_back(PreloadedFile{fmt::format("/grid/vo/{}/f{:05}", def.id, f),
                                        fmt::format("user{:02}", uniform(0, static_cast<Bytes>(params.users) - 1)),
                                        size});
    }
    spec.storage.push_back(std::move(def));
  }
  for (std::size_t i = 0; i < params.compute; ++i) {
    spec.compute.push_back(ComputeDef{fmt::format("CE-{:03}", i + 1), site_of(i),
                                      uniform(0, 400), uniform(0, 100)});
  }
  for (std::size_t i = 0; i < params.workload; ++i) {
    spec.services.push_back(ServiceDef{fmt::format("WMS-{:02}", i + 1), ResourceKind::WMS, site_of(i)});
  }
  if (params.catalogue_and_voms) {
    spec.services.push_back(ServiceDef{"LFC-1", ResourceKind::Catalogue, site_of(0)});
    spec.services.push_back(ServiceDef{"VOMS-1", ResourceKind::VOMS, site_of(0)});
  }
  return spec;
}

std::string_view to_string(NodeState state) {
  switch (state) {
    case NodeState::Up: return "Up";
    case NodeState::Down: return "Down";
    case NodeState::Degraded: return "Degraded";
  }
  return "?";
}

std::string_view to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::FullReportsFree: return "FullReportsFree";
    case FaultKind::OverstateFreeSpace: return "OverstateFreeSpace";
    case FaultKind::UnderreportUsed: return "UnderreportUsed";
    case FaultKind::InvalidJobCounts: return "InvalidJobCounts";
    case FaultKind::StaleRecord: return "StaleRecord";
    case FaultKind::Unpublished: return "Unpublished";
  }
  return "?";
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::SetState: return "SetState";
    case EventKind::InjectFault: return "InjectFault";
    case EventKind::ClearFault: return "ClearFault";
    case EventKind::SetQueue: return "SetQueue";
  }
  return "?";
}

namespace {
template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const Enum (&values)[N], std::string_view what) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  raise(ErrorCode::InvalidArgument, fmt::format("unknown {} '{}'", what, text));
}
}  // namespace

NodeState node_state_from_string(std::string_view text) {
  static constexpr NodeState kAll[] = {NodeState::Up, NodeState::Down, NodeState::Degraded};
  return parse_enum(text, kAll, "node state");
}

FaultKind fault_kind_from_string(std::string_view text) {
  static constexpr FaultKind kAll[] = {FaultKind::FullReportsFree, FaultKind::OverstateFreeSpace,
                                       FaultKind::UnderreportUsed, FaultKind::InvalidJobCounts,
                                       FaultKind::StaleRecord, FaultKind::Unpublished};
  return parse_enum(text, kAll, "fault kind");
}

EventKind event_kind_from_string(std::string_view text) {
  static constexpr EventKind kAll[] = {EventKind::SetState, EventKind::InjectFault, EventKind::ClearFault,
                                       EventKind::SetQueue};
  return parse_enum(text, kAll, "event kind");
}

// JSON ---------------------------------------------------------------------

using nlohmann::json;

void to_json(json& j, const FaultSpec& f) {
  j = json{{"kind", to_string(f.kind)}, {"magnitude", f.magnitude}, {"since", f.since}};
}

void from_json(const json& j, FaultSpec& f) {
  f.kind = fault_kind_from_string(j.at("kind").get<std::string>());
  f.magnitude = j.value("magnitude", 0.0);
  f.since = j.value("since", Timestamp{0});
}

void to_json(json& j, const InfoRecord& r) {
  j = json{{"id", r.id}, {"kind", to_string(r.kind)}};
  if (r.used) j["used"] = *r.used;
  if (r.free) j["free"] = *r.free;
  if (r.waiting) j["waiting"] = *r.waiting;
  if (r.running) j["running"] = *r.running;
  j["heartbeat"] = r.heartbeat;
}

void from_json(const json& j, InfoRecord& r) {
  r.id = j.at("id").get<std::string>();
  r.kind = resource_kind_from_string(j.at("kind").get<std::string>());
  auto opt = [&j](const char* key) -> std::optional<std::int64_t> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::int64_t>();
  };
  r.used = opt("used");
  r.free = opt("free");
  r.waiting = opt("waiting");
  r.running = opt("running");
  r.heartbeat = j.value("heartbeat", Timestamp{0});
}

void to_json(json& j, const InfoSnapshot& s) {
  j = json{{"taken_at", s.taken_at}, {"records", s.records}};
}

void from_json(const json& j, InfoSnapshot& s) {
  s.taken_at = j.at("taken_at").get<Timestamp>();
  s.records = j.at("records").get<std::vector<InfoRecord>>();
  std::sort(s.records.begin(), s.records.end(),
            [](const InfoRecord& a, const InfoRecord& b) { return a.id < b.id; });
}

void to_json(json& j, const CatalogueEntry& e) {
  json replicas = json::array();
  for (const auto& r : e.replicas) replicas.push_back(json{{"storage_id", r.storage_id}, {"pfn", r.pfn}});
  j = json{{"lfn", e.lfn}, {"owner", e.owner}, {"size", e.size}, {"replicas", replicas}};
}

void from_json(const json& j, CatalogueEntry& e) {
  e.lfn = j.at("lfn").get<std::string>();
  e.owner = j.at("owner").get<std::string>();
  e.size = j.value("size", Bytes{0});
  e.replicas.clear();
  for (const auto& r : j.value("replicas", json::array())) {
    e.replicas.push_back(Replica{r.at("storage_id").get<std::string>(), r.at("pfn").get<std::string>()});
  }
}

void to_json(json& j, const FabricSpec& s) {
  json storage = json::array();
  for (const auto& d : s.storage) {
    json files = json::array();
    for (const auto& f : d.files) files.push_back(json{{"lfn", f.lfn}, {"owner", f.owner}, {"size", f.size}});
    storage.push_back(json{{"id", d.id}, {"site", d.site}, {"capacity", d.capacity}, {"files", files}});
  }
  json compute = json::array();
  for (const auto& d : s.compute) {
    compute.push_back(json{{"id", d.id}, {"site", d.site}, {"waiting", d.waiting}, {"running", d.running}});
  }
  json services = json::array();
  for (const auto& d : s.services) {
    services.push_back(json{{"id", d.id}, {"kind", to_string(d.kind)}, {"site", d.site}});
  }
  j = json{{"storage", storage}, {"compute", compute}, {"services", services}};
  if (s.seed) j["seed"] = *s.seed;
}

void from_json(const json& j, FabricSpec& s) {
  s = FabricSpec{};
  if (j.contains("generate")) {
    const auto& g = j.at("generate");
    GeneratorParams p;
    p.storage = g.value("storage", std::size_t{0});
    p.compute = g.value("compute", std::size_t{0});
    p.workload = g.value("workload", std::size_t{0});
    p.catalogue_and_voms = g.value("catalogue_and_voms", true);
    p.users = g.value("users", p.users);
    p.files_per_storage = g.value("files_per_storage", std::size_t{0});
    p.min_capacity = g.value("min_capacity", p.min_capacity);
    p.max_capacity = g.value("max_capacity", p.max_capacity);
    p.min_file = g.value("min_file", p.min_file);
    p.max_file = g.value("max_file", p.max_file);
    p.seed = g.value("seed", p.seed);
    s = generate_spec(p);
  }
  for (const auto& d : j.value("storage", json::array())) {
    StorageDef def{d.at("id").get<std::string>(), d.value("site", std::string{}), d.at("capacity").get<Bytes>(), {}};
    for (const auto& f : d.value("files", json::array())) {
      def.files.push_back(PreloadedFile{f.at("lfn").get<std::string>(), f.at("owner").get<std::string>(),
                                        f.at("size").get<Bytes>()});
    }
    s.storage.push_back(std::move(def));
  }
  for (const auto& d : j.value("compute", json::array())) {
    s.compute.push_back(ComputeDef{d.at("id").get<std::string>(), d.value("site", std::string{}),
                                   d.value("waiting", std::int64_t{0}), d.value("running", std::int64_t{0})});
  }
  for (const auto& d : j.value("services", json::array())) {
    s.services.push_back(ServiceDef{d.at("id").get<std::string>(),
                                    resource_kind_from_string(d.at("kind").get<std::string>()),
                                    d.value("site", std::string{})});
  }
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
}

void to_json(json& j, const ScenarioEvent& e) {
  j = json{{"at", e.at}, {"kind", to_string(e.kind)}, {"resource", e.resource}};
  switch (e.kind) {
    case EventKind::SetState: j["state"] = to_string(e.state); break;
    case EventKind::InjectFault: j["fault"] = e.fault; break;
    case EventKind::ClearFault: break;
    case EventKind::SetQueue:
      j["waiting"] = e.waiting;
      j["running"] = e.running;
      break;
  }
}

void from_json(const json& j, ScenarioEvent& e) {
  e = ScenarioEvent{};
  e.at = j.at("at").get<Timestamp>();
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.resource = j.at("resource").get<std::string>();
  if (j.contains("state")) e.state = node_state_from_string(j.at("state").get<std::string>());
  if (j.contains("fault")) {
    e.fault = j.at("fault").get<FaultSpec>();
    if (!j.at("fault").contains("since")) e.fault.since = e.at;
  }
  e.waiting = j.value("waiting", std::int64_t{0});
  e.running = j.value("running", std::int64_t{0});
}

}  // namespace gridops::fabric
