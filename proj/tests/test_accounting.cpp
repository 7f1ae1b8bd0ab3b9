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
#include "gridops/accounting.hpp"

using namespace gridops;
using namespace gridops::accounting;

namespace {

UsageRecord rec(std::optional<UserId> user, const std::string& site, Timestamp t0, Timestamp t1, double cpu,
                std::int64_t jobs = 1, std::optional<std::string> subgroup = std::nullopt) {
  return UsageRecord{std::move(user), site, std::move(subgroup), TimeWindow{t0, t1}, cpu, jobs};
}

double total_cpu(const AccountingReport& r) {
  double sum = 0;
  for (const auto& row : r.rows) sum += row.cpu_hours;
  return sum;
}

}  // namespace

TEST_CASE("ingest_usage") {
  UsageLedger ledger;
  SUBCASE("valid record") {
    const std::vector<UsageRecord> batch{rec("u1", "S1", 0, 60, 10)};
    const auto r = ledger.ingest(batch);
    CHECK(r.accepted == 1);
    CHECK(r.rejected.empty());
  }
  SUBCASE("negative cpu") {
    const std::vector<UsageRecord> batch{rec("u1", "S1", 0, 60, -1)};
    const auto r = ledger.ingest(batch);
    CHECK(r.accepted == 0);
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].reason == "negative cpu");
  }
  SUBCASE("anonymous record counts toward incompleteness") {
    const std::vector<UsageRecord> batch{rec(std::nullopt, "S1", 0, 60, 10), rec("u1", "S1", 0, 60, 10)};
    CHECK(ledger.ingest(batch).accepted == 2);
    CHECK(ledger.completeness() == doctest::Approx(0.5));
  }
  SUBCASE("bad period and negative jobs") {
    const std::vector<UsageRecord> batch{rec("u1", "S1", 60, 60, 1), rec("u1", "S1", 0, 60, 1, -3)};
    const auto r = ledger.ingest(batch);
    CHECK(r.accepted == 0);
    CHECK(r.rejected.size() == 2);
    CHECK(r.rejected[1].index == 1);
  }
  SUBCASE("empty ledger is complete") { CHECK(ledger.completeness() == 1.0); }
}

TEST_CASE("aggregate") {
  SUBCASE("single record fully inside the window") {
    const std::vector<UsageRecord> records{rec("u1", "S1", 10, 20, 100, 4)};
    const auto r = aggregate(records, TimeWindow{0, 100}, GroupBy::User);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].key == "u1");
    CHECK(r.rows[0].cpu_hours == 100.0);
    CHECK(r.rows[0].jobs == 4.0);
  }
  SUBCASE("record half inside contributes half") {
    const std::vector<UsageRecord> records{rec("u1", "S1", 50, 150, 100, 10)};
    const auto r = aggregate(records, TimeWindow{0, 100}, GroupBy::WholeVO);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].cpu_hours == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(r.rows[0].jobs == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("anonymous records group under (unattributed)") {
    const std::vector<UsageRecord> records{rec(std::nullopt, "S1", 0, 10, 5), rec("u1", "S1", 0, 10, 3)};
    const auto r = aggregate(records, TimeWindow{0, 10}, GroupBy::User);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].key == std::string(kUnattributed));
    CHECK(r.completeness == doctest::Approx(0.5));
  }
  SUBCASE("rows sort by descending cpu") {
    const std::vector<UsageRecord> records{rec("u1", "A", 0, 10, 1), rec("u2", "B", 0, 10, 9),
                                           rec("u3", "C", 0, 10, 5)};
    const auto r = aggregate(records, TimeWindow{0, 10}, GroupBy::Site);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].key == "B");
    CHECK(r.rows[2].key == "A");
  }
  SUBCASE("subgroup grouping") {
    const std::vector<UsageRecord> records{rec("u1", "A", 0, 10, 1, 1, "g1"), rec("u2", "B", 0, 10, 2, 1, "g1"),
                                           rec("u3", "C", 0, 10, 5)};
    const auto r = aggregate(records, TimeWindow{0, 10}, GroupBy::Subgroup);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].cpu_hours == 5.0);
    CHECK(r.rows[1].key == "g1");
    CHECK(r.rows[1].cpu_hours == 3.0);
  }
  SUBCASE("records outside the window do not contribute") {
    const std::vector<UsageRecord> records{rec("u1", "A", 100, 200, 1)};
    CHECK(aggregate(records, TimeWindow{0, 100}, GroupBy::WholeVO).rows.empty());
  }
}

TEST_CASE("a year of fixture usage totals 19,000,000 cpu hours") {
  const auto records = testing::usage_log(19'000'000, 2000, 4);
  UsageLedger ledger;
  CHECK(ledger.ingest(records).accepted == records.size());
  const auto r = ledger.aggregate(TimeWindow{0, testing::kYear}, GroupBy::WholeVO);
  REQUIRE(r.rows.size() == 1);
  CHECK(std::abs(r.rows[0].cpu_hours - 19'000'000.0) / 19'000'000.0 < 1e-6);
  CHECK(r.completeness < 1.0);
}

TEST_CASE("pro-rata conservation over a partition of time") {
  const auto records = testing::usage_log(1'000'000, 300, 8);
  const TimeWindow whole{0, testing::kYear};
  for (auto g : {GroupBy::User, GroupBy::Site, GroupBy::Subgroup, GroupBy::WholeVO}) {
    double pieces = 0;
    for (Timestamp t = 0; t < testing::kYear; t += 30 * kMinutesPerDay) {
      pieces += total_cpu(aggregate(records, TimeWindow{t, std::min(t + 30 * kMinutesPerDay, testing::kYear)}, g));
    }
    const double single = total_cpu(aggregate(records, whole, g));
    CHECK(std::abs(pieces - single) / single < 1e-9);
  }
}

TEST_CASE("waiting_running_ratio") {
  const TimeWindow w{0, 100};
  SUBCASE("39 waiting over 10 running is 3.9") {
    const std::vector<QueueSample> s{{10, "CE-1", 39, 10}};
    CHECK(*waiting_running_ratio(s, w) == 3.9);
  }
  SUBCASE("nothing waiting") {
    const std::vector<QueueSample> s{{10, "CE-1", 0, 10}};
    CHECK(*waiting_running_ratio(s, w) == 0.0);
  }
  SUBCASE("nothing running is undefined") {
    const std::vector<QueueSample> s{{10, "CE-1", 5, 0}};
    CHECK_FALSE(waiting_running_ratio(s, w).has_value());
  }
  SUBCASE("no samples in the window is undefined") {
    const std::vector<QueueSample> s{{200, "CE-1", 5, 5}};
    CHECK_FALSE(waiting_running_ratio(s, w).has_value());
  }
  SUBCASE("mean of per-sample ratios") {
    const std::vector<QueueSample> s{{10, "CE-1", 10, 10}, {20, "CE-1", 30, 10}, {30, "CE-2", 7, 0}};
    CHECK(*waiting_running_ratio(s, w, RatioMode::MeanOfSampleRatios) == doctest::Approx(2.0));
    CHECK(*waiting_running_ratio(s, w) == doctest::Approx(47.0 / 20.0));
  }
  SUBCASE("scale invariance") {
    const auto base = testing::queue_fixture(3);
    auto scaled = base;
    for (auto& s : scaled) {
      s.waiting *= 7;
      s.running *= 7;
    }
    CHECK(*waiting_running_ratio(base, TimeWindow{0, 1000}) == *waiting_running_ratio(scaled, TimeWindow{0, 1000}));
  }
}

TEST_CASE("storage_trend") {
  SUBCASE("fixture series from 1.2 PB to 2.0 PB of 3.7 PB") {
    const auto snaps = testing::storage_growth_fixture(13);
    const auto series = storage_trend(snaps, TimeWindow{0, 400 * kMinutesPerDay});
    REQUIRE(series.size() == 13);
    CHECK(series.front().total_used == 1'200 * kTB);
    CHECK(series.back().total_used == 2'000 * kTB);
    for (const auto& p : series) CHECK(p.total_capacity == 3'700 * kTB);
    for (std::size_t i = 1; i < series.size(); ++i) CHECK(series[i].total_used >= series[i - 1].total_used);
  }
  SUBCASE("Suspect SE is excluded and counted") {
    fabric::InfoSnapshot s;
    s.taken_at = 5;
    fabric::InfoRecord good{"SE-1", ResourceKind::SE, 10, 90, {}, {}, 5};
    fabric::InfoRecord bad{"SE-2", ResourceKind::SE, 0, 0, {}, {}, 5};
    s.records = {good, bad};
    const auto series = storage_trend(std::span(&s, 1), TimeWindow{0, 10});
    REQUIRE(series.size() == 1);
    CHECK(series[0] == TrendPoint{5, 10, 100, 1});
  }
  SUBCASE("empty snapshot") {
    fabric::InfoSnapshot s;
    s.taken_at = 7;
    CHECK(storage_trend(std::span(&s, 1), TimeWindow{0, 10})[0] == TrendPoint{7, 0, 0, 0});
  }
  SUBCASE("only SEs in scope at the snapshot time count") {
    const auto snaps = testing::storage_growth_fixture(2);
    const auto series = storage_trend(snaps, TimeWindow{0, 400 * kMinutesPerDay},
                                      [](const ResourceId& id, Timestamp) { return id == "SE-002"; });
    CHECK(series[0].total_capacity == 3'700 * kTB / 37);
  }
}

TEST_CASE("usage CSV") {
  const auto records = parse_usage_csv(
      "user,site,subgroup,t0,t1,cpu_hours,jobs\n"
      "u1,SITE-A,g1,0,60,12.5,3\n"
      ",SITE-B,,0,120,4,1\n");
  REQUIRE(records.size() == 2);
  CHECK(records[0] == rec("u1", "SITE-A", 0, 60, 12.5, 3, "g1"));
  CHECK_FALSE(records[1].user.has_value());
  CHECK_FALSE(records[1].subgroup.has_value());
  CHECK_THROWS_AS(parse_usage_csv("u1,SITE-A,,0,x,1,1\n"), Error);
  CHECK_THROWS_AS(parse_usage_csv("u1,SITE-A\n"), Error);

  const auto report = aggregate(records, TimeWindow{0, 120}, GroupBy::Site);
  CHECK(report_csv(report) == "group,cpu_hours,jobs\nSITE-A,12.500000,3.000000\nSITE-B,4.000000,1.000000\n");
}

TEST_CASE("usage record JSON round trip") {
  const auto r = rec(std::nullopt, "S", 1, 2, 3.5, 4, "g");
  CHECK(nlohmann::json(r).get<UsageRecord>() == r);
}
