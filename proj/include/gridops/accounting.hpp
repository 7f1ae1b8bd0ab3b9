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

// Usage accounting: CPU-hour ingestion and aggregation, waiting/running
// queue ratios and storage usage trends.

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridops/core.hpp"
#include "gridops/fabric.hpp"

namespace gridops::accounting {

struct UsageRecord {
  std::optional<UserId> user;  // withheld by some sites
  std::string site;
  std::optional<std::string> subgroup;
  TimeWindow period;
  double cpu_hours = 0.0;  // normalized
  std::int64_t jobs = 0;

  bool operator==(const UsageRecord&) const = default;
};

struct Rejection {
  std::size_t index = 0;
  std::string reason;
};

struct IngestResult {
  std::size_t accepted = 0;
  std::vector<Rejection> rejected;
};

enum class GroupBy { User, Site, Subgroup, WholeVO };

inline constexpr std::string_view kUnattributed = "(unattributed)";

struct ReportRow {
  std::string key;
  double cpu_hours = 0.0;
  double jobs = 0.0;  // pro-rata, hence fractional
};

struct AccountingReport {
  TimeWindow window;
  GroupBy group_by = GroupBy::WholeVO;
  std::vector<ReportRow> rows;  // descending cpu_hours, then key
  double completeness = 1.0;    // attributed / contributing records
  std::size_t records = 0;
};

/// Why a record cannot be accepted, or nullopt.
std::optional<std::string> validate(const UsageRecord& record);

/// Records overlapping the window contribute in proportion to their overlap.
AccountingReport aggregate(std::span<const UsageRecord> records, TimeWindow window, GroupBy group_by);

/// Append-only usage log.
class UsageLedger {
 public:
  IngestResult ingest(std::span<const UsageRecord> records);
  AccountingReport aggregate(TimeWindow window, GroupBy group_by) const;

  const std::vector<UsageRecord>& records() const { return records_; }
  std::size_t attributed() const { return attributed_; }
  /// Fraction of accepted records that carry a user identity; 1 when empty.
  double completeness() const;

 private:
  std::vector<UsageRecord> records_;
  std::size_t attributed_ = 0;
};

struct QueueSample {
  Timestamp at = 0;
  ResourceId compute_id;
  std::int64_t waiting = 0;
  std::int64_t running = 0;
};

enum class RatioMode {
  SumOverSamples,     // (sum waiting) / (sum running)
  MeanOfSampleRatios  // mean over samples with running > 0
};

/// nullopt means "undefined": no in-window samples or zero running jobs.
std::optional<double> waiting_running_ratio(std::span<const QueueSample> samples, TimeWindow window,
                                            RatioMode mode = RatioMode::SumOverSamples);

std::vector<QueueSample> queue_samples(const fabric::InfoSnapshot& snapshot);

struct TrendPoint {
  Timestamp at = 0;
  Bytes total_used = 0;
  Bytes total_capacity = 0;
  std::size_t suspect_count = 0;

  bool operator==(const TrendPoint&) const = default;
};

/// Decides whether a storage element belonged to the VO at a given time.
using ScopePredicate = std::function<bool(const ResourceId&, Timestamp)>;

/// One point per in-window snapshot; capacity = published used + free.
std::vector<TrendPoint> storage_trend(std::span<const fabric::InfoSnapshot> snapshots, TimeWindow window,
                                      const ScopePredicate& in_scope = {});

std::vector<UsageRecord> parse_usage_csv(std::string_view text);
std::string report_csv(const AccountingReport& report);
nlohmann::ordered_json to_ordered_json(const AccountingReport& report);

std::string_view to_string(GroupBy g);
GroupBy group_by_from_string(std::string_view text);

void to_json(nlohmann::json& j, const UsageRecord& r);
void from_json(const nlohmann::json& j, UsageRecord& r);

}  // namespace gridops::accounting
