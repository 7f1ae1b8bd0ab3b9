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
#include "gridops/probes.hpp"

using namespace gridops;
using namespace gridops::probes;
using gridops::testing::ce;
using gridops::testing::se;
using gridops::testing::svc;

namespace {

fabric::Fabric small_fabric() {
  fabric::FabricSpec spec;
  spec.storage.push_back(se("SE-1", 100 * kGB));
  spec.storage.push_back(se("SE-2", 100 * kGB));
  spec.storage.push_back(se("SE-3", 100 * kGB));
  spec.storage.push_back(se("SE-FULL", 10 * kGB, {{"/full", "u1", 10 * kGB}}));
  spec.compute.push_back(ce("CE-1"));
  spec.services.push_back(svc("WMS-1", ResourceKind::WMS));
  spec.services.push_back(svc("LFC-1", ResourceKind::Catalogue));
  spec.services.push_back(svc("VOMS-1", ResourceKind::VOMS));
  return fabric::Fabric(spec);
}

topology::VOResourceSet vo_of(const fabric::Fabric& f, std::vector<ResourceId> ids) {
  topology::VOResourceSet set;
  set.computed_at = f.now();
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) set.members.push_back(topology::Member{id, *f.kind_of(id), {}});
  return set;
}

ProbeResult result(const ResourceId& id, Timestamp at, Outcome outcome, Check check = Check::SEReadWrite) {
  return ProbeResult{id, check, at, outcome, ""};
}

std::vector<ProbeResult> series(const ResourceId& id, const std::string& outcomes, Timestamp start = 30) {
  std::vector<ProbeResult> out;
  Timestamp at = start;
  for (char c : outcomes) {
    out.push_back(result(id, at, c == 'F' ? Outcome::Fail : Outcome::Ok));
    at += 30;
  }
  return out;
}

}  // namespace

TEST_CASE("run_probe") {
  auto f = small_fabric();
  SUBCASE("Up SE with free space") { CHECK(run_probe(f, "SE-1", Check::SEReadWrite).outcome == Outcome::Ok); }
  SUBCASE("Down SE") {
    f.set_state("SE-1", fabric::NodeState::Down);
    const auto r = run_probe(f, "SE-1", Check::SEReadWrite);
    CHECK(r.outcome == Outcome::Fail);
    CHECK(r.detail == "unavailable");
  }
  SUBCASE("full SE refuses the write") {
    const auto r = run_probe(f, "SE-FULL", Check::SEReadWrite);
    CHECK(r.outcome == Outcome::Fail);
    CHECK(r.detail == "write refused: StorageFull");
  }
  SUBCASE("probe leaves no trace on storage") {
    const auto before = f.storage().at("SE-1").used();
    run_probe(f, "SE-1", Check::SEReadWrite);
    CHECK(f.storage().at("SE-1").used() == before);
  }
  SUBCASE("published figures are never consulted") {
    f.inject_fault("SE-FULL", fabric::FaultSpec{fabric::FaultKind::FullReportsFree, 1e12, 0});
    f.inject_fault("SE-1", fabric::FaultSpec{fabric::FaultKind::Unpublished, 0, 0});
    CHECK(run_probe(f, "SE-FULL", Check::SEReadWrite).outcome == Outcome::Fail);
    CHECK(run_probe(f, "SE-1", Check::SEReadWrite).outcome == Outcome::Ok);
  }
  SUBCASE("service checks follow node state") {
    CHECK(run_probe(f, "CE-1", Check::CESubmit).outcome == Outcome::Ok);
    CHECK(run_probe(f, "WMS-1", Check::WMSPing).outcome == Outcome::Ok);
    CHECK(run_probe(f, "LFC-1", Check::CatalogueLookup).outcome == Outcome::Ok);
    f.set_state("VOMS-1", fabric::NodeState::Down);
    CHECK(run_probe(f, "VOMS-1", Check::VOMSPing).outcome == Outcome::Fail);
  }
  SUBCASE("unknown resource is an error, not a Fail") {
    try {
      run_probe(f, "SE-404", Check::SEReadWrite);
      FAIL("expected UnknownResource");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownResource);
    }
  }
  SUBCASE("result carries the clock") {
    f.advance_clock(90);
    CHECK(run_probe(f, "SE-1", Check::SEReadWrite).at == 90);
  }
}

TEST_CASE("probe_cycle") {
  auto f = small_fabric();
  const auto specs = default_probe_specs(30);
  SUBCASE("empty VO set") {
    f.advance_clock(60);
    CHECK(probe_cycle(f, specs, topology::VOResourceSet{}).empty());
  }
  SUBCASE("3 SEs at clock 60") {
    f.advance_clock(60);
    const auto out = probe_cycle(f, specs, vo_of(f, {"SE-3", "SE-1", "SE-2"}));
    REQUIRE(out.size() == 3);
    CHECK(out[0].resource == "SE-1");
    CHECK(out[2].resource == "SE-3");
  }
  SUBCASE("clock 45 misses the cadence") {
    f.advance_clock(45);
    CHECK(probe_cycle(f, specs, vo_of(f, {"SE-1", "SE-2", "SE-3"})).empty());
  }
  SUBCASE("one result per matching spec, deterministic order") {
    f.advance_clock(30);
    const auto set = vo_of(f, {"SE-1", "CE-1", "WMS-1", "LFC-1", "VOMS-1"});
    const auto a = probe_cycle(f, specs, set);
    CHECK(a.size() == 5);
    CHECK(a == probe_cycle(f, specs, set));
    CHECK(std::is_sorted(a.begin(), a.end(), [](const auto& x, const auto& y) { return x.resource < y.resource; }));
  }
}

TEST_CASE("evaluate_alarms") {
  SUBCASE("k=1 raises on the first Fail") {
    const auto book = evaluate_alarms(series("SE-1", "F"), {}, AlarmPolicy{1, 1});
    REQUIRE(book.alarms.size() == 1);
    CHECK(book.alarms[0].raised_at == 30);
    CHECK(book.alarms[0].open());
  }
  SUBCASE("k=3 with Fail,Ok,Fail,Fail raises nothing") {
    CHECK(evaluate_alarms(series("SE-1", "FOFF"), {}, AlarmPolicy{3, 2}).alarms.empty());
  }
  SUBCASE("k=3 raises on the third consecutive Fail") {
    const auto book = evaluate_alarms(series("SE-1", "OFFF"), {}, AlarmPolicy{3, 2});
    REQUIRE(book.alarms.size() == 1);
    CHECK(book.alarms[0].raised_at == 120);
    CHECK(book.alarms[0].consecutive_failures == 3);
  }
  SUBCASE("m=2 consecutive Ok clears") {
    auto book = evaluate_alarms(series("SE-1", "FFF"), {}, AlarmPolicy{3, 2});
    book = evaluate_alarms(series("SE-1", "OFOO", 120), std::move(book), AlarmPolicy{3, 2});
    REQUIRE(book.alarms.size() == 1);
    CHECK(book.alarms[0].cleared_at == Timestamp{210});
  }
  SUBCASE("one open alarm per resource and check") {
    const auto book = evaluate_alarms(series("SE-1", "FFFFFFFFF"), {}, AlarmPolicy{3, 2});
    CHECK(book.alarms.size() == 1);
    CHECK(book.open_alarms().size() == 1);
  }
  SUBCASE("incremental evaluation equals batch evaluation") {
    const auto all = series("SE-1", "FFFOOFFFFOOOF");
    const auto batch = evaluate_alarms(all, {}, AlarmPolicy{2, 2});
    AlarmBook inc;
    for (const auto& r : all) inc = evaluate_alarms(std::span(&r, 1), std::move(inc), AlarmPolicy{2, 2});
    CHECK(inc == batch);
  }
  SUBCASE("alarm ids are sequential") {
    const auto book = evaluate_alarms(series("SE-1", "FOOF"), {}, AlarmPolicy{1, 2});
    REQUIRE(book.alarms.size() == 2);
    CHECK(book.alarms[0].id == "ALM-000001");
    CHECK(book.alarms[1].id == "ALM-000002");
  }
}

TEST_CASE("availability_report") {
  const std::set<ResourceId> scope{"SE-1"};
  const TimeWindow window{0, 1000};
  auto nine_of_ten = series("SE-1", "OOOOOFOOOO");

  SUBCASE("9 Ok of 10, no downtime") {
    const auto r = availability_report(nine_of_ten, scope, window);
    CHECK(*r.per_resource.at("SE-1").availability == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(*r.per_resource.at("SE-1").reliability == doctest::Approx(0.9).epsilon(1e-12));
  }
  SUBCASE("the single Fail inside downtime") {
    const std::vector<topology::DowntimeWindow> dt{topology::make_downtime("SE-1", 175, 185)};
    const auto r = availability_report(nine_of_ten, scope, window, dt);
    CHECK(*r.per_resource.at("SE-1").availability == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(*r.per_resource.at("SE-1").reliability == 1.0);
  }
  SUBCASE("out-of-scope results are ignored") {
    auto noisy = nine_of_ten;
    for (const auto& r : series("SE-9", "FFFFF")) noisy.push_back(r);
    const auto a = availability_report(nine_of_ten, scope, window);
    const auto b = availability_report(noisy, scope, window);
    CHECK(probes::to_ordered_json(a) == probes::to_ordered_json(b));
  }
  SUBCASE("resources without results are unknown and excluded from the aggregate") {
    const auto r = availability_report(nine_of_ten, {"SE-1", "SE-2"}, window);
    CHECK_FALSE(r.per_resource.at("SE-2").availability.has_value());
    CHECK(*r.aggregate.availability == doctest::Approx(0.9));
  }
  SUBCASE("aggregate is the unweighted mean") {
    auto results = nine_of_ten;
    for (const auto& r : series("SE-2", "OF")) results.push_back(r);
    const auto r = availability_report(results, {"SE-1", "SE-2"}, window);
    CHECK(*r.aggregate.availability == doctest::Approx((0.9 + 0.5) / 2));
  }
  SUBCASE("window bounds are half-open") {
    const auto r = availability_report(nine_of_ten, scope, TimeWindow{30, 60});
    CHECK(r.per_resource.at("SE-1").total == 1);
  }
  SUBCASE("empty scope is rejected") { CHECK_THROWS_AS(availability_report(nine_of_ten, {}, window), Error); }
  SUBCASE("CSV export") {
    const auto csv = availability_csv(availability_report(nine_of_ten, {"SE-1", "SE-2"}, window));
    CHECK(csv ==
          "resource-id,window-start,window-end,availability,reliability\n"
          "SE-1,0,1000,0.900000,0.900000\n"
          "SE-2,0,1000,unknown,unknown\n"
          "(aggregate),0,1000,0.900000,0.900000\n");
  }
}

TEST_CASE("probe result and alarm JSON round trip") {
  const auto r = ProbeResult{"SE-1", Check::SEReadWrite, 30, Outcome::Fail, "unavailable"};
  CHECK(nlohmann::json(r).get<ProbeResult>() == r);
  const Alarm a{"ALM-000001", "CE-1", Check::CESubmit, 30, Timestamp{90}, 3, std::string("T-000001")};
  CHECK(nlohmann::json(a).get<Alarm>() == a);
}
