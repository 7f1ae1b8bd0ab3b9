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

#include "gridops/storage_ops.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace gridops::storage {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json opt_json(const std::optional<Bytes>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

double relative_gap(std::int64_t published, std::int64_t audited) {
  const double denom = std::max<double>(static_cast<double>(audited), 1.0);
  return std::abs(static_cast<double>(published) - static_cast<double>(audited)) / denom;
}

}  // namespace

// Filling rates ---------------------------------------------------------------

const FillingEntry* FillingRateReport::find(const ResourceId& id) const {
  for (const auto& e : entries) {
    if (e.storage_id == id) return &e;
  }
  return nullptr;
}

FillingRateReport compute_filling_rates(const fabric::InfoSnapshot& snapshot) {
  FillingRateReport report;
  report.taken_at = snapshot.taken_at;
  for (const auto& record : snapshot.records) {
    if (record.kind != ResourceKind::SE) continue;
    FillingEntry entry{record.id, record.used, record.free, std::nullopt, DataQuality::Suspect};
    if (record.used && record.free && *record.used >= 0 && *record.free >= 0) {
      const Bytes total = *record.used + *record.free;
      if (total > 0) {
        entry.rate = static_cast<double>(*record.used) / static_cast<double>(total);
        entry.quality = DataQuality::Ok;
      }
    }
    report.entries.push_back(std::move(entry));
  }
  sort_report(report, SortMode::Id);
  return report;
}

void sort_report(FillingRateReport& report, SortMode mode) {
  auto key_less = [mode](const FillingEntry& a, const FillingEntry& b) {
    switch (mode) {
      case SortMode::Rate:
        if (*a.rate != *b.rate) return *a.rate > *b.rate;
        break;
      case SortMode::Free:
        if (*a.published_free != *b.published_free) return *a.published_free > *b.published_free;
        break;
      case SortMode::Id:
        break;
    }
    return a.storage_id < b.storage_id;
  };
  std::stable_sort(report.entries.begin(), report.entries.end(), [&](const FillingEntry& a, const FillingEntry& b) {
    const bool sa = a.quality == DataQuality::Suspect;
    const bool sb = b.quality == DataQuality::Suspect;
    if (mode == SortMode::Id || (sa && sb)) return a.storage_id < b.storage_id;
    if (sa != sb) return sb;
    return key_less(a, b);
  });
}

SortMode sort_mode_from_string(std::string_view text) {
  if (text == "rate") return SortMode::Rate;
  if (text == "id") return SortMode::Id;
  if (text == "free") return SortMode::Free;
  raise(ErrorCode::InvalidArgument, fmt::format("unknown sort mode '{}' (rate|id|free)", text));
}

std::string filling_csv(const FillingRateReport& report) {
  std::string out = "storage-id,published-used,published-free,rate,quality\n";
  auto num = [](const std::optional<Bytes>& v) { return v ? std::to_string(*v) : std::string(); };
  for (const auto& e : report.entries) {
    out += fmt::format("{},{},{},{},{}\n", e.storage_id, num(e.published_used), num(e.published_free),
                       e.rate ? fmt::format("{:.6f}", *e.rate) : std::string(), to_string(e.quality));
  }
  return out;
}

ordered_json to_ordered_json(const FillingRateReport& report) {
  ordered_json entries = ordered_json::array();
  for (const auto& e : report.entries) {
    ordered_json row;
    row["storage_id"] = e.storage_id;
    row["published_used"] = opt_json(e.published_used);
    row["published_free"] = opt_json(e.published_free);
    row["rate"] = e.rate ? ordered_json(*e.rate) : ordered_json(nullptr);
    row["data_quality"] = to_string(e.quality);
    entries.push_back(std::move(row));
  }
  ordered_json out;
  out["taken_at"] = report.taken_at;
  out["entries"] = std::move(entries);
  return out;
}

// Publication errors ------------------------------------------------------------

std::vector<AuditSample> audit_from_fabric(const fabric::Fabric& fabric) {
  std::vector<AuditSample> out;
  for (const auto& [id, node] : fabric.storage()) {
    AuditSample s;
    s.id = id;
    s.kind = ResourceKind::SE;
    s.used = node.used();
    s.free = node.free();
    if (auto err = fabric.check_writable(id, 1)) s.write_refused_full = err->code() == ErrorCode::StorageFull;
    out.push_back(std::move(s));
  }
  for (const auto& [id, node] : fabric.compute()) {
    AuditSample s;
    s.id = id;
    s.kind = ResourceKind::CE;
    s.waiting = node.waiting;
    s.running = node.running;
    out.push_back(std::move(s));
  }
  for (const auto& [id, node] : fabric.services()) {
    AuditSample s;
    s.id = id;
    s.kind = node.kind;
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::vector<Finding> detect_publication_errors(const fabric::InfoSnapshot& snapshot,
                                               std::span<const AuditSample> audit,
                                               const DetectionPolicy& policy) {
  std::vector<Finding> findings;
  auto add = [&findings](const ResourceId& id, FindingKind kind, std::string detail) {
    findings.push_back(Finding{id, kind, std::move(detail)});
  };
  const double tol = policy.relative_tolerance;

  for (const auto& sample : audit) {
    const fabric::InfoRecord* rec = snapshot.find(sample.id);
    if (!rec) {
      add(sample.id, FindingKind::MissingRecord, "resource absent from the information system");
      continue;
    }
    if (snapshot.taken_at - rec->heartbeat > policy.staleness_bound) {
      add(sample.id, FindingKind::StaleHeartbeat,
          fmt::format("record is {} minutes old", snapshot.taken_at - rec->heartbeat));
    }

    if (sample.kind == ResourceKind::SE) {
      if (!rec->used || !rec->free || *rec->used < 0 || *rec->free < 0) {
        add(sample.id, FindingKind::NegativeOrMissingFields, "used/free missing or negative");
        continue;
      }
      if (sample.write_refused_full && *rec->free > 0) {
        add(sample.id, FindingKind::FullButReportsFree,
            fmt::format("write refused but {} bytes published free", *rec->free));
      } else if (sample.free && relative_gap(*rec->free, *sample.free) > tol) {
        add(sample.id, FindingKind::FreeSpaceMismatch,
            fmt::format("published free {} vs audited {}", *rec->free, *sample.free));
      }
      if (sample.used && relative_gap(*rec->used, *sample.used) > tol) {
        add(sample.id, FindingKind::UsedSpaceMismatch,
            fmt::format("published used {} vs audited {}", *rec->used, *sample.used));
      }
    } else if (sample.kind == ResourceKind::CE) {
      if (!rec->waiting || !rec->running || *rec->waiting < 0 || *rec->running < 0) {
        add(sample.id, FindingKind::NegativeOrMissingFields, "job counts missing or negative");
        continue;
      }
      const bool waiting_off = sample.waiting && relative_gap(*rec->waiting, *sample.waiting) > tol;
      const bool running_off = sample.running && relative_gap(*rec->running, *sample.running) > tol;
      if (waiting_off || running_off) {
        add(sample.id, FindingKind::InvalidJobCounts,
            fmt::format("published {}/{} vs audited {}/{} waiting/running", *rec->waiting, *rec->running,
                        sample.waiting.value_or(0), sample.running.value_or(0)));
      }
    }
  }
  return findings;
}

std::set<ResourceId> flagged_resources(std::span<const Finding> findings) {
  std::set<ResourceId> out;
  for (const auto& f : findings) out.insert(f.resource);
  return out;
}

ordered_json to_ordered_json(std::span<const Finding> findings) {
  ordered_json out = ordered_json::array();
  for (const auto& f : findings) {
    ordered_json row;
    row["resource"] = f.resource;
    row["finding"] = to_string(f.kind);
    row["detail"] = f.detail;
    out.push_back(std::move(row));
  }
  return out;
}

// Heavy users -------------------------------------------------------------------

std::vector<HeavyUserEntry> owners_on(const ResourceId& storage_id,
                                      std::span<const fabric::CatalogueEntry> catalogue) {
  std::map<UserId, Bytes> per_owner;
  for (const auto& entry : catalogue) {
    for (const auto& r : entry.replicas) {
      if (r.storage_id == storage_id) per_owner[entry.owner] += entry.size;
    }
  }
  std::vector<HeavyUserEntry> out;
  for (const auto& [owner, bytes] : per_owner) out.push_back(HeavyUserEntry{storage_id, owner, bytes, 0});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.bytes_owned > b.bytes_owned; });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
  return out;
}

std::string format_bytes(Bytes bytes) {
  return fmt::format("{:.2f} GB ({} bytes)", static_cast<double>(bytes) / static_cast<double>(kGB), bytes);
}

std::string render_notification(const ResourceId& storage_id, double rate,
                                 std::span<const HeavyUserEntry> entries) {
  static constexpr std::string_view kTemplate =
      "To: {owner}\n"
      "Subject: storage element {se} is {rate} full\n"
      "\n"
      "Dear {owner},\n"
      "\n"
      "The storage element {se} is {rate} full. According to the file catalogue\n"
      "you own {bytes} on it. Please delete the files you no longer need or\n"
      "move them to a less loaded storage element.\n"
      "\n"
      "The VO support team\n";
  std::string out;
  const std::string rate_text = fmt::format("{:.1f}%", rate * 100.0);
  for (const auto& e : entries) {
    if (!out.empty()) out += "----\n";
    out += fmt::format(fmt::runtime(kTemplate), fmt::arg("owner", e.owner), fmt::arg("se", storage_id),
                       fmt::arg("rate", rate_text), fmt::arg("bytes", format_bytes(e.bytes_owned)));
  }
  return out;
}

std::vector<HeavyUserScan> scan_heavy_users(const fabric::InfoSnapshot& snapshot,
                                            std::span<const fabric::CatalogueEntry> catalogue,
                                            double threshold, std::size_t top_n) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) raise(ErrorCode::InvalidArgument, "threshold must be in [0,1]");
  if (top_n < 1) raise(ErrorCode::InvalidArgument, "top_n must be >= 1");

  std::vector<HeavyUserScan> out;
  for (const auto& entry : compute_filling_rates(snapshot).entries) {
    if (entry.quality != DataQuality::Ok || !(*entry.rate > threshold)) continue;
    HeavyUserScan scan{entry.storage_id, *entry.rate, owners_on(entry.storage_id, catalogue), {}};
    if (scan.entries.size() > top_n) scan.entries.resize(top_n);
    scan.notification = render_notification(scan.storage_id, scan.rate, scan.entries);
    out.push_back(std::move(scan));
  }
  return out;
}

ordered_json to_ordered_json(std::span<const HeavyUserScan> scans) {
  ordered_json out = ordered_json::array();
  for (const auto& s : scans) {
    ordered_json entries = ordered_json::array();
    for (const auto& e : s.entries) {
      ordered_json row;
      row["rank"] = e.rank;
      row["owner"] = e.owner;
      row["bytes_owned"] = e.bytes_owned;
      entries.push_back(std::move(row));
    }
    ordered_json row;
    row["storage_id"] = s.storage_id;
    row["rate"] = s.rate;
    row["entries"] = std::move(entries);
    row["notification"] = s.notification;
    out.push_back(std::move(row));
  }
  return out;
}

// Reconciliation ----------------------------------------------------------------

Inventories inventories_from_fabric(const fabric::Fabric& fabric) {
  Inventories out;
  for (const auto& [id, node] : fabric.storage()) {
    auto& files = out[id];
    for (const auto& [pfn, file] : node.files) files.insert(InventoryFile{pfn, file.size, file.owner});
  }
  return out;
}

ReconciliationReport reconcile(std::span<const fabric::CatalogueEntry> catalogue,
                               const Inventories& inventories, Timestamp scanned_at) {
  ReconciliationReport report;
  report.scanned_at = scanned_at;

  std::map<ResourceId, std::set<std::string>> registered;
  for (const auto& entry : catalogue) {
    for (const auto& r : entry.replicas) registered[r.storage_id].insert(r.pfn);
  }
  std::map<ResourceId, std::set<std::string>> stored;
  for (const auto& [id, files] : inventories) {
    auto& names = stored[id];
    for (const auto& f : files) names.insert(f.pfn);
  }

  for (const auto& entry : catalogue) {
    for (const auto& r : entry.replicas) {
      auto it = stored.find(r.storage_id);
      if (it == stored.end() || !it->second.contains(r.pfn)) {
        report.ghosts.push_back(Ghost{entry.lfn, r.storage_id, r.pfn});
      }
    }
  }
  for (const auto& [id, files] : inventories) {
    auto it = registered.find(id);
    for (const auto& f : files) {
      if (it == registered.end() || !it->second.contains(f.pfn)) {
        report.zombies.push_back(Zombie{id, f.pfn, f.size, f.owner});
      }
    }
  }
  std::sort(report.zombies.begin(), report.zombies.end());
  std::sort(report.ghosts.begin(), report.ghosts.end());
  return report;
}

ordered_json to_ordered_json(const ReconciliationReport& report) {
  ordered_json zombies = ordered_json::array();
  for (const auto& z : report.zombies) {
    ordered_json row;
    row["storage_id"] = z.storage_id;
    row["pfn"] = z.pfn;
    row["size"] = z.size;
    row["owner"] = z.owner;
    zombies.push_back(std::move(row));
  }
  ordered_json ghosts = ordered_json::array();
  for (const auto& g : report.ghosts) {
    ordered_json row;
    row["lfn"] = g.lfn;
    row["storage_id"] = g.storage_id;
    row["pfn"] = g.pfn;
    ghosts.push_back(std::move(row));
  }
  ordered_json out;
  out["scanned_at"] = report.scanned_at;
  out["zombies"] = std::move(zombies);
  out["ghosts"] = std::move(ghosts);
  return out;
}

std::string reconciliation_csv(const ReconciliationReport& report) {
  std::string out = "type,storage-id,physical-name,lfn,size,owner\n";
  for (const auto& z : report.zombies) out += fmt::format("zombie,{},{},,{},{}\n", z.storage_id, z.pfn, z.size, z.owner);
  for (const auto& g : report.ghosts) out += fmt::format("ghost,{},{},{},,\n", g.storage_id, g.pfn, g.lfn);
  return out;
}

// Decommissioning ---------------------------------------------------------------

DecommissionPlan plan_decommission(const ResourceId& source, const topology::VOResourceSet& vo_set,
                                   const fabric::InfoSnapshot& snapshot,
                                   std::span<const fabric::CatalogueEntry> catalogue,
                                   const Inventories& inventories, const PlanOptions& options) {
  const topology::Member* src = vo_set.find(source);
  if (!src) raise(ErrorCode::UnknownResource, fmt::format("{} is not a resource of the VO", source));
  if (src->kind != ResourceKind::SE)
    raise(ErrorCode::InvalidArgument, fmt::format("{} is not a storage element", source));

  DecommissionPlan plan;
  plan.source = source;

  // Projected free space per eligible target, from published figures.
  std::map<ResourceId, Bytes> projected;
  const auto filling = compute_filling_rates(snapshot);
  for (const auto& m : vo_set.members) {
    if (m.kind != ResourceKind::SE || m.id == source) continue;
    if (m.presence != topology::Presence::RegisteredAndPublished) continue;
    if (options.eligible_targets && !options.eligible_targets->contains(m.id)) continue;
    const FillingEntry* e = filling.find(m.id);
    if (!e || e->quality != DataQuality::Ok) continue;
    projected[m.id] = *e->published_free;
  }
  std::vector<ResourceId> targets;
  for (const auto& [id, free] : projected) targets.push_back(id);
  std::size_t rr_cursor = 0;

  for (const auto& entry : catalogue) {
    auto on_source = std::find_if(entry.replicas.begin(), entry.replicas.end(),
                                  [&](const fabric::Replica& r) { return r.storage_id == source; });
    if (on_source == entry.replicas.end()) continue;
    if (options.skip_replicated && entry.replicas.size() > 1) {
      plan.steps.push_back(MigrationStep{entry.lfn, source, {}, entry.size});
      continue;
    }
    auto fits = [&](const ResourceId& t) {
      if (projected[t] < entry.size) return false;
      return std::none_of(entry.replicas.begin(), entry.replicas.end(),
                          [&t](const fabric::Replica& r) { return r.storage_id == t; });
    };

    std::optional<ResourceId> chosen;
    if (options.placement == Placement::MostFreeFirst) {
      for (const auto& t : targets) {
        if (fits(t) && (!chosen || projected[t] > projected[*chosen])) chosen = t;
      }
    } else {
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& t = targets[(rr_cursor + i) % targets.size()];
        if (fits(t)) {
          chosen = t;
          rr_cursor = (rr_cursor + i + 1) % targets.size();
          break;
        }
      }
    }
    if (!chosen) {
      plan.unplaceable.push_back(entry.lfn);
      continue;
    }
    projected[*chosen] -= entry.size;
    plan.steps.push_back(MigrationStep{entry.lfn, source, *chosen, entry.size});
  }

  if (auto it = inventories.find(source); it != inventories.end()) {
    std::set<std::string> registered;
    for (const auto& entry : catalogue) {
      for (const auto& r : entry.replicas) {
        if (r.storage_id == source) registered.insert(r.pfn);
      }
    }
    for (const auto& f : it->second) {
      if (!registered.contains(f.pfn)) plan.zombies.push_back(Zombie{source, f.pfn, f.size, f.owner});
    }
  }
  return plan;
}

DecommissionPlan execute_migration(fabric::Fabric& fabric, DecommissionPlan plan, const MigrationHooks& hooks) {
  if (plan.status != PlanStatus::Draft)
    raise(ErrorCode::Conflict,
          fmt::format("plan {} is {}, only Draft plans can run", plan.id, to_string(plan.status)));
  plan.status = PlanStatus::Running;
  for (std::size_t i = plan.completed; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    if (hooks.before_step) hooks.before_step(i, fabric);
    try {
      if (!step.to.empty()) fabric.copy_replica(step.lfn, step.from, step.to);
      fabric.remove_replica(step.lfn, step.from);
    } catch (const Error& e) {
      plan.status = PlanStatus::Aborted;
      plan.failure = fmt::format("step {} ({} -> {}): {}", i + 1, step.lfn, step.to, e.what());
      return plan;
    }
    plan.completed = i + 1;
  }
  plan.status = PlanStatus::Done;
  return plan;
}

// Departed users ----------------------------------------------------------------

CleanupReport cleanup_departed(std::span<const fabric::CatalogueEntry> catalogue,
                               const std::set<UserId>& members) {
  CleanupReport report;
  for (const auto& entry : catalogue) {
    if (members.contains(entry.owner)) continue;
    report.bytes_reclaimable += entry.size * static_cast<Bytes>(entry.replicas.size());
    report.deletions.push_back(entry);
  }
  return report;
}

std::size_t execute_cleanup(fabric::Fabric& fabric, const CleanupReport& report) {
  std::size_t removed = 0;
  for (const auto& entry : report.deletions) {
    if (!fabric.catalogue().contains(entry.lfn)) continue;
    fabric.delete_entry(entry.lfn);
    ++removed;
  }
  return removed;
}

// Names and JSON ----------------------------------------------------------------

std::string_view to_string(DataQuality q) { return q == DataQuality::Ok ? "Ok" : "Suspect"; }

std::string_view to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::FullButReportsFree: return "FullButReportsFree";
    case FindingKind::FreeSpaceMismatch: return "FreeSpaceMismatch";
    case FindingKind::UsedSpaceMismatch: return "UsedSpaceMismatch";
    case FindingKind::NegativeOrMissingFields: return "NegativeOrMissingFields";
    case FindingKind::StaleHeartbeat: return "StaleHeartbeat";
    case FindingKind::InvalidJobCounts: return "InvalidJobCounts";
    case FindingKind::MissingRecord: return "MissingRecord";
  }
  return "?";
}

std::string_view to_string(Placement p) { return p == Placement::MostFreeFirst ? "MostFreeFirst" : "RoundRobin"; }

std::string_view to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Draft: return "Draft";
    case PlanStatus::Running: return "Running";
    case PlanStatus::Done: return "Done";
    case PlanStatus::Aborted: return "Aborted";
  }
  return "?";
}

Placement placement_from_string(std::string_view text) {
  if (text == "MostFreeFirst") return Placement::MostFreeFirst;
  if (text == "RoundRobin") return Placement::RoundRobin;
  raise(ErrorCode::InvalidArgument, fmt::format("unknown placement '{}'", text));
}

PlanStatus plan_status_from_string(std::string_view text) {
  for (auto s : {PlanStatus::Draft, PlanStatus::Running, PlanStatus::Done, PlanStatus::Aborted}) {
    if (to_string(s) == text) return s;
  }
  raise(ErrorCode::InvalidArgument, fmt::format("unknown plan status '{}'", text));
}

ordered_json to_ordered_json(const DecommissionPlan& plan) {
  ordered_json steps = ordered_json::array();
  for (const auto& s : plan.steps) {
    ordered_json row;
    row["lfn"] = s.lfn;
    row["from"] = s.from;
    row["to"] = s.to;
    row["size"] = s.size;
    steps.push_back(std::move(row));
  }
  ordered_json zombies = ordered_json::array();
  for (const auto& z : plan.zombies) {
    ordered_json row;
    row["storage_id"] = z.storage_id;
    row["pfn"] = z.pfn;
    row["size"] = z.size;
    row["owner"] = z.owner;
    zombies.push_back(std::move(row));
  }
  ordered_json out;
  out["id"] = plan.id;
  out["source"] = plan.source;
  out["status"] = to_string(plan.status);
  out["completed"] = plan.completed;
  out["steps"] = std::move(steps);
  out["unplaceable"] = plan.unplaceable;
  out["zombies"] = std::move(zombies);
  out["failure"] = plan.failure ? ordered_json(*plan.failure) : ordered_json(nullptr);
  return out;
}

DecommissionPlan plan_from_json(const json& j) {
  DecommissionPlan plan;
  plan.id = j.value("id", std::string{});
  plan.source = j.at("source").get<std::string>();
  plan.status = plan_status_from_string(j.value("status", std::string("Draft")));
  plan.completed = j.value("completed", std::size_t{0});
  for (const auto& s : j.value("steps", json::array())) {
    plan.steps.push_back(MigrationStep{s.at("lfn").get<std::string>(), s.at("from").get<std::string>(),
                                       s.value("to", std::string{}), s.value("size", Bytes{0})});
  }
  plan.unplaceable = j.value("unplaceable", std::vector<std::string>{});
  for (const auto& z : j.value("zombies", json::array())) {
    plan.zombies.push_back(Zombie{z.at("storage_id").get<std::string>(), z.at("pfn").get<std::string>(),
                                  z.value("size", Bytes{0}), z.value("owner", std::string{})});
  }
  if (j.contains("failure") && !j.at("failure").is_null()) plan.failure = j.at("failure").get<std::string>();
  if (plan.completed > plan.steps.size()) raise(ErrorCode::ParseError, "plan completed count exceeds step count");
  return plan;
}

ordered_json to_ordered_json(const CleanupReport& report) {
  ordered_json deletions = ordered_json::array();
  for (const auto& e : report.deletions) {
    ordered_json row;
    row["lfn"] = e.lfn;
    row["owner"] = e.owner;
    row["size"] = e.size;
    row["replicas"] = e.replicas.size();
    deletions.push_back(std::move(row));
  }
  ordered_json out;
  out["deletions"] = std::move(deletions);
  out["bytes_reclaimable"] = report.bytes_reclaimable;
  return out;
}

}  // namespace gridops::storage
