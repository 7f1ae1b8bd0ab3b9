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

#include "fixtures.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace gridops::testing {

fabric::StorageDef se(const ResourceId& id, Bytes capacity, std::vector<fabric::PreloadedFile> files) {
  return fabric::StorageDef{id, "SITE-" + id, capacity, std::move(files)};
}

fabric::ComputeDef ce(const ResourceId& id, std::int64_t waiting, std::int64_t running) {
  return fabric::ComputeDef{id, "SITE-" + id, waiting, running};
}

fabric::ServiceDef svc(const ResourceId& id, ResourceKind kind) { return fabric::ServiceDef{id, kind, "SITE-" + id}; }

namespace {

// `parts` non-negative integers summing to `total`.
std::vector<std::int64_t> partition(std::int64_t total, std::size_t parts, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> cut(0, total);
  std::vector<std::int64_t> cuts{0, total};
  for (std::size_t i = 1; i < parts; ++i) cuts.push_back(cut(rng));
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::int64_t> out;
  for (std::size_t i = 1; i < cuts.size(); ++i) out.push_back(cuts[i] - cuts[i - 1]);
  return out;
}

incidents::Ticket solved_ticket(const std::string& id, Timestamp opened_at, int days, int steps, int people,
                                std::mt19937_64& rng) {
  static const incidents::TicketKind kinds[] = {incidents::TicketKind::SE, incidents::TicketKind::CE,
                                                incidents::TicketKind::WMS, incidents::TicketKind::User,
                                                incidents::TicketKind::Other};
  const auto kind = kinds[rng() % 5];
  std::optional<ResourceId> resource;
  if (kind != incidents::TicketKind::User && kind != incidents::TicketKind::Other) {
    resource = fmt::format("{}-{:03}", incidents::to_string(kind), rng() % 100 + 1);
  }
  auto author = [&](int i) { return fmt::format("person{}", i % people); };
  auto t = incidents::open_ticket(id, kind, resource, opened_at, author(0), "user u01 over quota");
  const Timestamp solved_at = opened_at + days * kMinutesPerDay;
  const int comments = steps - 2;
  for (int i = 1; i <= comments; ++i) {
    const Timestamp at = opened_at + (solved_at - opened_at) * i / (comments + 1);
    t = incidents::add_step(std::move(t), incidents::TicketStep{at, author(i), incidents::StepAction::Comment, "update"});
  }
  return incidents::transition(std::move(t), incidents::TicketStatus::Solved, solved_at, author(0));
}

}  // namespace

std::vector<incidents::Ticket> ticket_corpus(std::size_t pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<incidents::Ticket> out;
  for (std::size_t p = 0; p < pairs; ++p) {
    const Timestamp a = static_cast<Timestamp>(2 * p) * kMinutesPerDay;
    out.push_back(solved_ticket(fmt::format("T-{:06}", 2 * p + 1), a, 10, 9, 3, rng));
    out.push_back(solved_ticket(fmt::format("T-{:06}", 2 * p + 2), a + kMinutesPerDay, 18, 11, 4, rng));
  }
  return out;
}

std::vector<accounting::UsageRecord> usage_log(double total, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto hours = partition(static_cast<std::int64_t>(total), count, rng);
  std::uniform_int_distribution<Timestamp> start(0, kYear - 2);
  std::vector<accounting::UsageRecord> out;
  for (std::size_t i = 0; i < count; ++i) {
    accounting::UsageRecord r;
    if (rng() % 5 != 0) r.user = fmt::format("user{:02}", rng() % 20);
    r.site = fmt::format("SITE-{:02}", rng() % 12);
    if (rng() % 2 == 0) r.subgroup = fmt::format("group-{}", rng() % 4);
    r.period.start = start(rng);
    r.period.end = std::uniform_int_distribution<Timestamp>(r.period.start + 1, kYear)(rng);
    r.cpu_hours = static_cast<double>(hours[i]);
    r.jobs = static_cast<std::int64_t>(rng() % 1000);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<accounting::QueueSample> queue_fixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  constexpr std::size_t kCes = 10;
  constexpr std::size_t kTicks = 10;
  const auto waiting = partition(39'000, kCes * kTicks, rng);
  const auto running = partition(10'000, kCes * kTicks, rng);
  std::vector<accounting::QueueSample> out;
  for (std::size_t t = 0; t < kTicks; ++t) {
    for (std::size_t c = 0; c < kCes; ++c) {
      const std::size_t i = t * kCes + c;
      out.push_back(accounting::QueueSample{static_cast<Timestamp>(30 * (t + 1)), fmt::format("CE-{:03}", c + 1),
                                            waiting[i], running[i]});
    }
  }
  return out;
}

std::vector<fabric::InfoSnapshot> storage_growth_fixture(std::size_t points) {
  constexpr std::size_t kSes = 37;
  constexpr Bytes kCapacity = 3'700 * kTB;
  std::vector<fabric::InfoSnapshot> out;
  for (std::size_t p = 0; p < points; ++p) {
    const Bytes used_total =
        1'200 * kTB + static_cast<Bytes>(800 * kTB * static_cast<Bytes>(p) / static_cast<Bytes>(points - 1));
    fabric::InfoSnapshot snap;
    snap.taken_at = static_cast<Timestamp>(p) * 30 * kMinutesPerDay;
    for (std::size_t s = 0; s < kSes; ++s) {
      const Bytes capacity = kCapacity / kSes;
      Bytes used = used_total / kSes + (s == 0 ? used_total % kSes : 0);
      fabric::InfoRecord r;
      r.id = fmt::format("SE-{:03}", s + 1);
      r.kind = ResourceKind::SE;
      r.used = used;
      r.free = capacity - used;
      r.heartbeat = snap.taken_at;
      snap.records.push_back(r);
    }
    out.push_back(std::move(snap));
  }
  return out;
}

MisconfigScenario misconfig_scenario(std::size_t faulted, std::uint64_t seed, Timestamp onset) {
  std::mt19937_64 rng(seed);
  MisconfigScenario out;
  out.onset = onset;

  std::vector<std::size_t> order(108);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::map<std::size_t, fabric::FaultKind> faults;
  static const fabric::FaultKind kinds[] = {fabric::FaultKind::FullReportsFree, fabric::FaultKind::OverstateFreeSpace,
                                            fabric::FaultKind::UnderreportUsed, fabric::FaultKind::Unpublished};
  for (std::size_t i = 0; i < faulted; ++i) faults[order[i]] = kinds[i % 4];

  auto& spec = out.config.fabric;
  std::uniform_int_distribution<Bytes> file_size(1 * kGB, 50 * kGB);
  for (std::size_t i = 0; i < 108; ++i) {
    const ResourceId id = fmt::format("SE-{:03}", i + 1);
    std::vector<fabric::PreloadedFile> files;
    Bytes used = 0;
    for (int f = 0; f < 4; ++f) {
      const Bytes size = file_size(rng);
      files.push_back(fabric::PreloadedFile{fmt::format("/grid/vo/{}/f{}", id, f), fmt::format("user{:02}", rng() % 8), size});
      used += size;
    }
    auto it = faults.find(i);
    const bool full = it != faults.end() && it->second == fabric::FaultKind::FullReportsFree;
    spec.storage.push_back(se(id, full ? used : used + 10 * kTB, std::move(files)));
    if (it != faults.end()) {
      const double magnitude = it->second == fabric::FaultKind::FullReportsFree ? 500.0 * kGB : 0.5;
      fabric::ScenarioEvent e;
      e.at = onset;
      e.kind = fabric::EventKind::InjectFault;
      e.resource = id;
      e.fault = fabric::FaultSpec{it->second, magnitude, onset};
      out.config.events.push_back(e);
      out.injected.insert(id);
    }
  }
  for (std::size_t i = 0; i < 186; ++i) {
    spec.compute.push_back(ce(fmt::format("CE-{:03}", i + 1), static_cast<std::int64_t>(rng() % 400),
                              static_cast<std::int64_t>(rng() % 100 + 1)));
  }
  for (std::size_t i = 0; i < 36; ++i) spec.services.push_back(svc(fmt::format("WMS-{:02}", i + 1), ResourceKind::WMS));
  spec.services.push_back(svc("LFC-1", ResourceKind::Catalogue));
  spec.services.push_back(svc("VOMS-1", ResourceKind::VOMS));
  out.config.duration = onset + 4 * out.config.scan_interval;
  out.config.seed = seed;
  return out;
}

fabric::FabricSpec random_small_fabric(std::mt19937_64& rng, std::size_t max_se, std::size_t max_files) {
  fabric::FabricSpec spec;
  const std::size_t ses = 1 + rng() % max_se;
  std::uniform_int_distribution<Bytes> capacity(50 * kGB, 400 * kGB);
  std::vector<Bytes> room;
  for (std::size_t s = 0; s < ses; ++s) {
    spec.storage.push_back(se(fmt::format("SE-{}", s + 1), capacity(rng)));
    room.push_back(spec.storage.back().capacity);
  }
  const std::size_t files = rng() % (max_files + 1);
  std::uniform_int_distribution<Bytes> size(1 * kGB, 40 * kGB);
  for (std::size_t f = 0; f < files; ++f) {
    const fabric::PreloadedFile file{fmt::format("/grid/vo/f{:03}", f), fmt::format("user{}", rng() % 4), size(rng)};
    const std::size_t replicas = 1 + rng() % 2;
    for (std::size_t r = 0; r < replicas; ++r) {
      const std::size_t s = (f + r * (1 + rng() % ses)) % ses;
      if (room[s] < file.size) continue;
      auto& target = spec.storage[s].files;
      if (std::any_of(target.begin(), target.end(), [&](const auto& x) { return x.lfn == file.lfn; })) continue;
      target.push_back(file);
      room[s] -= file.size;
    }
  }
  return spec;
}

WhitelistCase random_whitelist_case(std::mt19937_64& rng) {
  WhitelistCase c;
  const Timestamp at = 1000 + static_cast<Timestamp>(rng() % 5000);
  c.vo_set.computed_at = at;
  static const ResourceKind kinds[] = {ResourceKind::SE, ResourceKind::CE, ResourceKind::WMS};
  static const topology::Presence presences[] = {topology::Presence::RegisteredAndPublished,
                                                 topology::Presence::RegisteredAndPublished,
                                                 topology::Presence::RegisteredOnly, topology::Presence::PublishedOnly};
  const std::size_t n = 1 + rng() % 30;
  for (std::size_t i = 0; i < n; ++i) {
    const auto kind = kinds[rng() % 3];
    const ResourceId id = fmt::format("{}-{:03}", to_string(kind), i);
    c.vo_set.members.push_back(topology::Member{id, kind, presences[rng() % 4]});
    if (kind == ResourceKind::SE && rng() % 10 != 0) {
      storage::FillingEntry e;
      e.storage_id = id;
      e.published_used = static_cast<Bytes>(rng() % 1000);
      e.published_free = static_cast<Bytes>(rng() % 1000);
      const Bytes total = *e.published_used + *e.published_free;
      if (total > 0) {
        e.rate = static_cast<double>(*e.published_used) / static_cast<double>(total);
      } else {
        e.quality = storage::DataQuality::Suspect;
      }
      c.filling.entries.push_back(e);
    }
    if (rng() % 5 == 0) {
      const Timestamp start = at - static_cast<Timestamp>(rng() % 200);
      c.downtimes.push_back(topology::make_downtime(id, start, start + 1 + static_cast<Timestamp>(rng() % 400)));
    }
    if (rng() % 6 == 0) {
      probes::Alarm a;
      a.id = fmt::format("ALM-{}", i);
      a.resource = id;
      a.raised_at = at - static_cast<Timestamp>(rng() % 3000);
      if (rng() % 2) a.cleared_at = a.raised_at + static_cast<Timestamp>(rng() % 3000);
      c.alarms.push_back(a);
    }
  }
  std::sort(c.vo_set.members.begin(), c.vo_set.members.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  c.policy.max_filling = static_cast<double>(rng() % 1001) / 1000.0;
  c.policy.alarm_lookback = static_cast<Timestamp>(rng() % 3000);
  return c;
}

topology::WhiteList whitelist_of(const WhitelistCase& c) {
  return topology::compute_whitelist(c.vo_set, topology::active_downtimes(c.downtimes, c.vo_set.computed_at),
                                     c.filling, c.alarms, c.policy);
}

MigrationRun random_migration_run(std::mt19937_64& rng) {
  auto spec = random_small_fabric(rng, 5, 100);
  spec.storage.push_back(se(fmt::format("SE-{}", spec.storage.size() + 1), 2 * kTB));
  fabric::Fabric f(spec);
  const auto& source = spec.storage[rng() % spec.storage.size()].id;
  const auto catalogue = f.catalogue_entries();
  const auto vo_set = topology::merge_topology(topology::registry_from_fabric(f), f.publish_info(), f.now());
  const auto plan =
      storage::plan_decommission(source, vo_set, f.publish_info(), catalogue, storage::inventories_from_fabric(f));

  storage::MigrationHooks hooks;
  if (!plan.steps.empty() && rng() % 2 == 0) {
    const std::size_t at = rng() % plan.steps.size();
    const ResourceId victim = rng() % 3 == 0 ? source : plan.steps[at].to;
    hooks.before_step = [at, victim](std::size_t i, fabric::Fabric& fab) {
      if (i == at) fab.set_state(victim, fabric::NodeState::Down);
    };
  }
  MigrationRun run;
  run.registered_before = registered_bytes(f);
  run.status = storage::execute_migration(f, plan, hooks).status;
  run.registered_after = registered_bytes(f);
  run.reconciled_clean = storage::reconcile(f.catalogue_entries(), storage::inventories_from_fabric(f)).clean();
  return run;
}


storage::ReconciliationReport brute_force_reconcile(const std::vector<fabric::CatalogueEntry>& catalogue,
                                                    const storage::Inventories& inventories) {
  storage::ReconciliationReport report;
  for (const auto& [storage_id, files] : inventories) {
    for (const auto& file : files) {
      bool registered = false;
      for (const auto& entry : catalogue) {
        for (const auto& replica : entry.replicas) {
          if (replica.storage_id == storage_id && replica.pfn == file.pfn) registered = true;
        }
      }
      if (!registered) report.zombies.push_back(storage::Zombie{storage_id, file.pfn, file.size, file.owner});
    }
  }
  for (const auto& entry : catalogue) {
    for (const auto& replica : entry.replicas) {
      bool present = false;
      for (const auto& [storage_id, files] : inventories) {
        for (const auto& file : files) {
          if (storage_id == replica.storage_id && file.pfn == replica.pfn) present = true;
        }
      }
      if (!present) report.ghosts.push_back(storage::Ghost{entry.lfn, replica.storage_id, replica.pfn});
    }
  }
  std::sort(report.zombies.begin(), report.zombies.end());
  std::sort(report.ghosts.begin(), report.ghosts.end());
  return report;
}

Bytes registered_bytes(const fabric::Fabric& fabric) {
  Bytes total = 0;
  for (const auto& [lfn, entry] : fabric.catalogue()) total += entry.size * static_cast<Bytes>(entry.replicas.size());
  return total;
}

TempDir::TempDir(const std::string& prefix) {
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() / fmt::format("{}-{:016x}", prefix, (std::uint64_t{rd()} << 32) | rd());
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace gridops::testing
