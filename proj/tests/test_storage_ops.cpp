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

#include "doctest.h"

#include "fixtures.hpp"
#include "gridops/storage_ops.hpp"
#include "gridops/topology.hpp"

using namespace gridops;
using namespace gridops::storage;
using gridops::testing::ce;
using gridops::testing::se;

namespace {

fabric::InfoRecord se_record(const ResourceId& id, std::optional<Bytes> used, std::optional<Bytes> free,
                             Timestamp heartbeat = 0) {
  fabric::InfoRecord r;
  r.id = id;
  r.kind = ResourceKind::SE;
  r.used = used;
  r.free = free;
  r.heartbeat = heartbeat;
  return r;
}

fabric::InfoSnapshot snapshot(std::vector<fabric::InfoRecord> records, Timestamp at = 0) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return fabric::InfoSnapshot{at, std::move(records)};
}

AuditSample audit_se(const ResourceId& id, Bytes used, Bytes free, bool full = false) {
  AuditSample a;
  a.id = id;
  a.kind = ResourceKind::SE;
  a.write_refused_full = full;
  a.used = used;
  a.free = free;
  return a;
}

fabric::CatalogueEntry entry(const std::string& lfn, const UserId& owner, Bytes size,
                             std::vector<ResourceId> storage_ids) {
  fabric::CatalogueEntry e{lfn, owner, size, {}};
  for (const auto& s : storage_ids) e.replicas.push_back(fabric::Replica{s, fabric::physical_name(lfn, s)});
  return e;
}

std::set<FindingKind> kinds_for(const std::vector<Finding>& findings, const ResourceId& id) {
  std::set<FindingKind> out;
  for (const auto& f : findings) {
    if (f.resource == id) out.insert(f.kind);
  }
  return out;
}

topology::VOResourceSet vo_from(const fabric::Fabric& f) {
  const auto registry = topology::registry_from_fabric(f);
  return topology::merge_topology(registry, f.publish_info(), f.now());
}

DecommissionPlan plan_for(const fabric::Fabric& f, const ResourceId& source, PlanOptions options = {}) {
  const auto catalogue = f.catalogue_entries();
  return plan_decommission(source, vo_from(f), f.publish_info(), catalogue, inventories_from_fabric(f), options);
}

}  // namespace

TEST_CASE("compute_filling_rates") {
  const auto report = compute_filling_rates(snapshot({se_record("SE-A", 80 * kGB, 20 * kGB),
                                                      se_record("SE-B", 0, 0),
                                                      se_record("SE-C", 0, 100 * kGB),
                                                      se_record("SE-D", -5, 100),
                                                      se_record("SE-E", std::nullopt, 100)}));
  REQUIRE(report.entries.size() == 5);
  CHECK(*report.find("SE-A")->rate == doctest::Approx(0.80).epsilon(1e-12));
  CHECK(report.find("SE-B")->quality == DataQuality::Suspect);
  CHECK_FALSE(report.find("SE-B")->rate.has_value());
  CHECK(*report.find("SE-C")->rate == 0.0);
  CHECK(report.find("SE-D")->quality == DataQuality::Suspect);
  CHECK(report.find("SE-E")->quality == DataQuality::Suspect);
}

TEST_CASE("filling report sorting") {
  auto report = compute_filling_rates(snapshot({se_record("SE-A", 50, 50), se_record("SE-B", 90, 10),
                                                se_record("SE-C", 0, 0), se_record("SE-D", 10, 990)}));
  auto ids = [&] {
    std::vector<ResourceId> out;
    for (const auto& e : report.entries) out.push_back(e.storage_id);
    return out;
  };
  sort_report(report, SortMode::Rate);
  CHECK(ids() == std::vector<ResourceId>{"SE-B", "SE-A", "SE-D", "SE-C"});
  sort_report(report, SortMode::Free);
  CHECK(ids() == std::vector<ResourceId>{"SE-D", "SE-A", "SE-B", "SE-C"});
  sort_report(report, SortMode::Id);
  CHECK(ids() == std::vector<ResourceId>{"SE-A", "SE-B", "SE-C", "SE-D"});
  CHECK_THROWS_AS(sort_mode_from_string("size"), Error);
}

TEST_CASE("filling CSV") {
  auto report = compute_filling_rates(snapshot({se_record("SE-A", 80, 20), se_record("SE-B", 0, 0)}));
  CHECK(filling_csv(report) ==
        "storage-id,published-used,published-free,rate,quality\n"
        "SE-A,80,20,0.800000,Ok\n"
        "SE-B,0,0,,Suspect\n");
}

TEST_CASE("detect_publication_errors") {
  SUBCASE("write refused while publishing 500 GB free") {
    const auto findings = detect_publication_errors(snapshot({se_record("SE-1", 100 * kGB, 500 * kGB)}),
                                                    std::vector{audit_se("SE-1", 100 * kGB, 0, true)});
    CHECK(kinds_for(findings, "SE-1") == std::set{FindingKind::FullButReportsFree});
  }
  SUBCASE("fault-free resource yields nothing") {
    CHECK(detect_publication_errors(snapshot({se_record("SE-1", 80 * kGB, 20 * kGB)}),
                                    std::vector{audit_se("SE-1", 80 * kGB, 20 * kGB)})
              .empty());
  }
  SUBCASE("free-space mismatch beyond 5%") {
    const auto findings = detect_publication_errors(snapshot({se_record("SE-1", 80 * kGB, 30 * kGB)}),
                                                    std::vector{audit_se("SE-1", 80 * kGB, 20 * kGB)});
    CHECK(kinds_for(findings, "SE-1") == std::set{FindingKind::FreeSpaceMismatch});
  }
  SUBCASE("mismatch within tolerance is accepted") {
    const auto findings = detect_publication_errors(snapshot({se_record("SE-1", 80 * kGB, 21 * kGB)}),
                                                    std::vector{audit_se("SE-1", 80 * kGB, 20 * kGB)});
    CHECK(findings.empty());
  }
  SUBCASE("missing or negative fields") {
    const auto findings = detect_publication_errors(snapshot({se_record("SE-1", std::nullopt, 10)}),
                                                    std::vector{audit_se("SE-1", 0, 10)});
    CHECK(kinds_for(findings, "SE-1").count(FindingKind::NegativeOrMissingFields) == 1);
  }
  SUBCASE("stale heartbeat") {
    const auto findings = detect_publication_errors(snapshot({se_record("SE-1", 10, 10, 0)}, 121),
                                                    std::vector{audit_se("SE-1", 10, 10)});
    CHECK(kinds_for(findings, "SE-1") == std::set{FindingKind::StaleHeartbeat});
    CHECK(detect_publication_errors(snapshot({se_record("SE-1", 10, 10, 1)}, 121),
                                    std::vector{audit_se("SE-1", 10, 10)})
              .empty());
  }
  SUBCASE("CE job counts") {
    fabric::InfoRecord r;
    r.id = "CE-1";
    r.kind = ResourceKind::CE;
    r.waiting = 200;
    r.running = 10;
    AuditSample a;
    a.id = "CE-1";
    a.kind = ResourceKind::CE;
    a.waiting = 100;
    a.running = 10;
    const auto findings = detect_publication_errors(snapshot({r}), std::vector{a});
    CHECK(kinds_for(findings, "CE-1") == std::set{FindingKind::InvalidJobCounts});
  }
  SUBCASE("suppressed record") {
    const auto findings = detect_publication_errors(snapshot({}), std::vector{audit_se("SE-1", 10, 10)});
    CHECK(kinds_for(findings, "SE-1") == std::set{FindingKind::MissingRecord});
  }
}

TEST_CASE("every fault kind is detected against fabric ground truth") {
  fabric::FabricSpec spec;
  spec.storage.push_back(se("SE-FULL", 10 * kGB, {{"/a", "u1", 10 * kGB}}));
  spec.storage.push_back(se("SE-OVER", 100 * kGB, {{"/b", "u1", 40 * kGB}}));
  spec.storage.push_back(se("SE-UNDER", 100 * kGB, {{"/c", "u1", 40 * kGB}}));
  spec.storage.push_back(se("SE-GONE", 100 * kGB));
  spec.storage.push_back(se("SE-CLEAN", 100 * kGB, {{"/d", "u1", 40 * kGB}}));
  spec.compute.push_back(ce("CE-BAD", 100, 20));
  spec.compute.push_back(ce("CE-CLEAN", 100, 20));
  fabric::Fabric f(spec);
  f.inject_fault("SE-FULL", {fabric::FaultKind::FullReportsFree, 500.0 * kGB, 0});
  f.inject_fault("SE-OVER", {fabric::FaultKind::OverstateFreeSpace, 0.5, 0});
  f.inject_fault("SE-UNDER", {fabric::FaultKind::UnderreportUsed, 0.5, 0});
  f.inject_fault("SE-GONE", {fabric::FaultKind::Unpublished, 0, 0});
  f.inject_fault("CE-BAD", {fabric::FaultKind::InvalidJobCounts, 1.0, 0});
  const auto findings = detect_publication_errors(f.publish_info(), audit_from_fabric(f));
  CHECK(flagged_resources(findings) == std::set<ResourceId>{"CE-BAD", "SE-FULL", "SE-GONE", "SE-OVER", "SE-UNDER"});
}

TEST_CASE("scan_heavy_users") {
  const std::vector<fabric::CatalogueEntry> catalogue{entry("/a", "u1", 60 * kGB, {"SE-1"}),
                                                      entry("/b", "u2", 30 * kGB, {"SE-1"}),
                                                      entry("/c", "u3", 5 * kGB, {"SE-1", "SE-2"})};
  SUBCASE("exactly at the threshold is excluded") {
    CHECK(scan_heavy_users(snapshot({se_record("SE-1", 80, 20)}), catalogue, 0.80, 10).empty());
  }
  SUBCASE("rate 0.95, top_n 1 lists u1 with 60 GB") {
    const auto scans = scan_heavy_users(snapshot({se_record("SE-1", 95 * kGB, 5 * kGB)}), catalogue, 0.80, 1);
    REQUIRE(scans.size() == 1);
    REQUIRE(scans[0].entries.size() == 1);
    CHECK(scans[0].entries[0].owner == "u1");
    CHECK(scans[0].entries[0].bytes_owned == 60 * kGB);
    CHECK(scans[0].entries[0].rank == 1);
    CHECK(scans[0].notification ==
          "To: u1\n"
          "Subject: storage element SE-1 is 95.0% full\n"
          "\n"
          "Dear u1,\n"
          "\n"
          "The storage element SE-1 is 95.0% full. According to the file catalogue\n"
          "you own 60.00 GB (60000000000 bytes) on it. Please delete the files you no longer need or\n"
          "move them to a less loaded storage element.\n"
          "\n"
          "The VO support team\n");
  }
  SUBCASE("no SE above the threshold") {
    CHECK(scan_heavy_users(snapshot({se_record("SE-1", 10, 90)}), catalogue, 0.80, 10).empty());
  }
  SUBCASE("owner bytes add up to the registered bytes on the SE") {
    const auto owners = owners_on("SE-1", catalogue);
    Bytes sum = 0;
    for (const auto& o : owners) sum += o.bytes_owned;
    CHECK(sum == 95 * kGB);
    CHECK(owners_on("SE-2", catalogue).size() == 1);
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(scan_heavy_users(snapshot({}), catalogue, 1.5, 1), Error);
    CHECK_THROWS_AS(scan_heavy_users(snapshot({}), catalogue, 0.5, 0), Error);
  }
}

TEST_CASE("reconcile") {
  SUBCASE("forced set differences") {
    const std::vector<fabric::CatalogueEntry> catalogue{entry("f1", "u", 1, {"SE-A"}), entry("f2", "u", 1, {"SE-A"})};
    Inventories inv;
    inv["SE-A"] = {InventoryFile{fabric::physical_name("f1", "SE-A"), 1, "u"},
                   InventoryFile{fabric::physical_name("f3", "SE-A"), 7, "v"}};
    const auto r = reconcile(catalogue, inv, 42);
    CHECK(r.scanned_at == 42);
    REQUIRE(r.ghosts.size() == 1);
    CHECK(r.ghosts[0].lfn == "f2");
    CHECK(r.ghosts[0].storage_id == "SE-A");
    REQUIRE(r.zombies.size() == 1);
    CHECK(r.zombies[0].pfn == fabric::physical_name("f3", "SE-A"));
    CHECK(r.zombies[0].size == 7);
    CHECK(r.zombies[0].owner == "v");
  }
  SUBCASE("consistent state is clean") {
    fabric::FabricSpec spec;
    spec.storage.push_back(se("SE-1", 100 * kGB, {{"/a", "u1", kGB}, {"/b", "u1", kGB}}));
    fabric::Fabric f(spec);
    CHECK(reconcile(f.catalogue_entries(), inventories_from_fabric(f)).clean());
  }
  SUBCASE("matches the brute-force oracle on a corrupted fabric") {
    std::mt19937_64 rng(99);
    fabric::Fabric f(testing::random_small_fabric(rng, 4, 40));
    const auto catalogue = f.catalogue_entries();
    std::size_t k = 0;
    for (const auto& e : catalogue) {
      const auto mode = k++ % 2 ? fabric::ConsistencyMode::MakeGhost : fabric::ConsistencyMode::MakeZombie;
      f.corrupt_consistency(mode, e.lfn, e.replicas.front().storage_id);
      if (k > 6) break;
    }
    f.synthesize_zombie("SE-1", "u9", "stray", kGB);
    const auto now = f.catalogue_entries();
    const auto inv = inventories_from_fabric(f);
    const auto got = reconcile(now, inv);
    const auto want = testing::brute_force_reconcile(now, inv);
    CHECK(got.zombies == want.zombies);
    CHECK(got.ghosts == want.ghosts);
  }
}

TEST_CASE("plan_decommission") {
  SUBCASE("one 10 GB file, one target with 50 GB free") {
    fabric::FabricSpec spec;
    spec.storage.push_back(se("SE-SRC", 100 * kGB, {{"/a", "u1", 10 * kGB}}));
    spec.storage.push_back(se("SE-T", 50 * kGB));
    fabric::Fabric f(spec);
    const auto plan = plan_for(f, "SE-SRC");
    REQUIRE(plan.steps.size() == 1);
    CHECK(plan.steps[0] == MigrationStep{"/a", "SE-SRC", "SE-T", 10 * kGB});
    CHECK(plan.unplaceable.empty());
    CHECK(plan.status == PlanStatus::Draft);
  }
  SUBCASE("two 60 GB files, one target with 100 GB free") {
    fabric::FabricSpec spec;
    spec.storage.push_back(se("SE-SRC", 200 * kGB, {{"/a", "u1", 60 * kGB}, {"/b", "u1", 60 * kGB}}));
    spec.storage.push_back(se("SE-T", 100 * kGB));
    fabric::Fabric f(spec);
    const auto plan = plan_for(f, "SE-SRC");
    CHECK(plan.steps.size() == 1);
    CHECK(plan.unplaceable == std::vector<std::string>{"/b"});
  }
  SUBCASE("source holding only zombies") {
    fabric::FabricSpec spec;
    spec.storage.push_back(se("SE-SRC", 100 * kGB));
    spec.storage.push_back(se("SE-T", 100 * kGB));
    fabric::Fabric f(spec);
    f.synthesize_zombie("SE-SRC", "u1", "orphan", kGB);
    const auto plan = plan_for(f, "SE-SRC");
    CHECK(plan.steps.empty());
    REQUIRE(plan.zombies.size() == 1);
    CHECK(plan.zombies[0].owner == "u1");
  }
  SUBCASE("no eligible target leaves everything unplaceable") {
    fabric::FabricSpec spec;
    spec.storage.push_back(se("SE-SRC", 100 * kGB, {{"/a", "u1", kGB}, {"/b", "u1", kGB}}));
    fabric::Fabric f(spec);
    const auto plan = plan_for(f, "SE-SRC");
    CHECK(plan.steps.empty());
    CHECK(plan.unplaceable.size() == 2);
    CHECK(plan.status == PlanStatus::Draft);
  }
  SUBCASE("targets already holding the file are skipped") {
    fabric::FabricSpec spec;
    spec.storage.push_back(se("SE-SRC", 100 * kGB, {{"/a", "u1", kGB}}));
    spec.storage.push_back(se("SE-BIG", 100 * kGB, {{"/a", "u1", kGB}}));
    spec.storage.push_back(se("SE-SMALL", 10 * kGB));
    fabric::Fabric f(spec);
    const auto plan = plan_for(f, "SE-SRC");
    REQUIRE(plan.steps.size() == 1);
    CHECK(plan.steps[0].to == "SE-SMALL");
  }
  SUBCASE("skip_replicated drops instead of copying") {
    fabric::FabricSpec spec;
    spec.storage.push_back(se("SE-SRC", 100 * kGB, {{"/a", "u1", kGB}, {"/b", "u1", kGB}}));
    spec.storage.push_back(se("SE-T", 100 * kGB, {{"/a", "u1", kGB}}));
    fabric::Fabric f(spec);
    PlanOptions options;
    options.skip_replicated = true;
    const auto plan = plan_for(f, "SE-SRC", options);
    REQUIRE(plan.steps.size() == 2);
    CHECK(plan.steps[0].to.empty());
    CHECK(plan.steps[1].to == "SE-T");
  }
  SUBCASE("round robin alternates targets") {
    fabric::FabricSpec spec;
    spec.storage.push_back(se("SE-SRC", 100 * kGB, {{"/a", "u", kGB}, {"/b", "u", kGB}, {"/c", "u", kGB}}));
    spec.storage.push_back(se("SE-T1", 100 * kGB));
    spec.storage.push_back(se("SE-T2", 100 * kGB));
    fabric::Fabric f(spec);
    PlanOptions options;
    options.placement = Placement::RoundRobin;
    const auto plan = plan_for(f, "SE-SRC", options);
    REQUIRE(plan.steps.size() == 3);
    CHECK(plan.steps[0].to != plan.steps[1].to);
    CHECK(plan.steps[0].to == plan.steps[2].to);
  }
  SUBCASE("source outside the VO set is rejected") {
    fabric::FabricSpec spec;
    spec.storage.push_back(se("SE-1", 100 * kGB));
    fabric::Fabric f(spec);
    CHECK_THROWS_AS(plan_for(f, "SE-404"), Error);
  }
}

TEST_CASE("execute_migration") {
  fabric::FabricSpec spec;
  spec.storage.push_back(se("SE-SRC", 100 * kGB, {{"/a", "u1", 10 * kGB}, {"/b", "u2", 20 * kGB}}));
  spec.storage.push_back(se("SE-T", 100 * kGB));
  fabric::Fabric f(spec);

  SUBCASE("valid two-step plan completes") {
    const Bytes before = testing::registered_bytes(f);
    const auto plan = execute_migration(f, plan_for(f, "SE-SRC"));
    CHECK(plan.status == PlanStatus::Done);
    CHECK(plan.completed == 2);
    for (const auto& [lfn, e] : f.catalogue()) {
      for (const auto& r : e.replicas) CHECK(r.storage_id != "SE-SRC");
    }
    CHECK(f.storage().at("SE-SRC").used() == 0);
    CHECK(testing::registered_bytes(f) == before);
  }
  SUBCASE("target Down before step 2 aborts after step 1") {
    MigrationHooks hooks;
    hooks.before_step = [](std::size_t i, fabric::Fabric& fab) {
      if (i == 1) fab.set_state("SE-T", fabric::NodeState::Down);
    };
    const auto plan = execute_migration(f, plan_for(f, "SE-SRC"), hooks);
    CHECK(plan.status == PlanStatus::Aborted);
    CHECK(plan.completed == 1);
    CHECK(plan.failure.has_value());
    CHECK(reconcile(f.catalogue_entries(), inventories_from_fabric(f)).clean());
  }
  SUBCASE("empty plan is done immediately") {
    DecommissionPlan empty;
    empty.source = "SE-SRC";
    CHECK(execute_migration(f, empty).status == PlanStatus::Done);
  }
  SUBCASE("only Draft plans execute") {
    auto plan = execute_migration(f, plan_for(f, "SE-SRC"));
    try {
      execute_migration(f, plan);
      FAIL("expected Conflict");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Conflict);
    }
  }
  SUBCASE("plan JSON round trip") {
    const auto plan = plan_for(f, "SE-SRC");
    const auto back = plan_from_json(to_ordered_json(plan));
    CHECK(to_ordered_json(back) == to_ordered_json(plan));
  }
}

TEST_CASE("cleanup_departed") {
  const std::vector<fabric::CatalogueEntry> catalogue{entry("/a", "u1", 10 * kGB, {"SE-1"}),
                                                      entry("/b", "u9", 10 * kGB, {"SE-1"}),
                                                      entry("/c", "u9", 20 * kGB, {"SE-2"}),
                                                      entry("/d", "u8", 10 * kGB, {"SE-1", "SE-2"})};
  SUBCASE("all owners active") {
    const auto r = cleanup_departed(catalogue, {"u1", "u8", "u9"});
    CHECK(r.deletions.empty());
    CHECK(r.bytes_reclaimable == 0);
  }
  SUBCASE("u9 departed with two single-replica entries") {
    const auto r = cleanup_departed(catalogue, {"u1", "u8"});
    CHECK(r.deletions.size() == 2);
    CHECK(r.bytes_reclaimable == 30 * kGB);
  }
  SUBCASE("replicas count towards reclaimable bytes") {
    const auto r = cleanup_departed(catalogue, {"u1", "u9"});
    CHECK(r.deletions.size() == 1);
    CHECK(r.bytes_reclaimable == 20 * kGB);
  }
  SUBCASE("execution goes through the catalogue and stays consistent") {
    fabric::FabricSpec spec;
    spec.storage.push_back(se("SE-1", 100 * kGB, {{"/a", "u1", kGB}, {"/b", "u9", 2 * kGB}}));
    fabric::Fabric f(spec);
    const auto cat = f.catalogue_entries();
    const auto report = cleanup_departed(cat, {"u1"});
    CHECK(execute_cleanup(f, report) == 1);
    CHECK(f.storage().at("SE-1").used() == kGB);
    CHECK(reconcile(f.catalogue_entries(), inventories_from_fabric(f)).clean());
  }
}
