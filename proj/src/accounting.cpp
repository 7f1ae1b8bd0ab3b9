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

#include "gridops/accounting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "gridops/storage_ops.hpp"

namespace gridops::accounting {

std::optional<std::string> validate(const UsageRecord& record) {
  if (!(record.cpu_hours >= 0.0) || !std::isfinite(record.cpu_hours)) return "negative cpu";
  if (!record.period.well_formed()) return "period must satisfy t0 < t1";
  if (record.jobs < 0) return "negative jobs";
  if (record.site.empty()) return "missing site";
  return std::nullopt;
}

namespace {

std::string group_key(const UsageRecord& r, GroupBy g) {
  switch (g) {
    case GroupBy::User: return r.user ? *r.user : std::string(kUnattributed);
    case GroupBy::Site: return r.site;
    case GroupBy::Subgroup: return r.subgroup ? *r.subgroup : std::string(kUnattributed);
    case GroupBy::WholeVO: return "(vo)";
  }
  return {};
}

}  // namespace

AccountingReport aggregate(std::span<const UsageRecord> records, TimeWindow window, GroupBy group_by) {
  if (!window.well_formed()) raise(ErrorCode::InvalidArgument, "accounting window must satisfy t0 < t1");
  AccountingReport report;
  report.window = window;
  report.group_by = group_by;

  std::map<std::string, ReportRow> rows;
  std::size_t attributed = 0;
  for (const auto& r : records) {
    const Timestamp lo = std::max(r.period.start, window.start);
    const Timestamp hi = std::min(r.period.end, window.end);
    if (lo >= hi) continue;
    const double share = lo == r.period.start && hi == r.period.end
                             ? 1.0
                             : static_cast<double>(hi - lo) / static_cast<double>(r.period.length());
    auto& row = rows[group_key(r, group_by)];
    row.cpu_hours += r.cpu_hours * share;
    row.jobs += static_cast<double>(r.jobs) * share;
    ++report.records;
    if (r.user) ++attributed;
  }
  for (auto& [key, row] : rows) {
    row.key = key;
    report.rows.push_back(row);
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.cpu_hours > b.cpu_hours; });
  report.completeness =
      report.records == 0 ? 1.0 : static_cast<double>(attributed) / static_cast<double>(report.records);
  return report;
}

IngestResult UsageLedger::ingest(std::span<const UsageRecord> records) {
  IngestResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (auto reason = validate(records[i])) {
      result.rejected.push_back(Rejection{i, *reason});
      continue;
    }
    records_.push_back(records[i]);
    if (records[i].user) ++attributed_;
    ++result.accepted;
  }
  return result;
}

AccountingReport UsageLedger::aggregate(TimeWindow window, GroupBy group_by) const {
  return accounting::aggregate(records_, window, group_by);
}

double UsageLedger::completeness() const {
  return records_.empty() ? 1.0 : static_cast<double>(attributed_) / static_cast<double>(records_.size());
}

std::optional<double> waiting_running_ratio(std::span<const QueueSample> samples, TimeWindow window,
                                            RatioMode mode) {
  std::int64_t waiting = 0;
  std::int64_t running = 0;
  double ratio_sum = 0.0;
  std::size_t ratio_n = 0;
  for (const auto& s : samples) {
    if (!window.contains(s.at)) continue;
    waiting += s.waiting;
    running += s.running;
    if (s.running > 0) {
      ratio_sum += static_cast<double>(s.waiting) / static_cast<double>(s.running);
      ++ratio_n;
    }
  }
  if (mode == RatioMode::MeanOfSampleRatios) {
    if (ratio_n == 0) return std::nullopt;
    return ratio_sum / static_cast<double>(ratio_n);
  }
  if (running == 0) return std::nullopt;
  return static_cast<double>(waiting) / static_cast<double>(running);
}

std::vector<QueueSample> queue_samples(const fabric::InfoSnapshot& snapshot) {
  std::vector<QueueSample> out;
  for (const auto& r : snapshot.records) {
    if (r.kind != ResourceKind::CE || !r.waiting || !r.running) continue;
    if (*r.waiting < 0 || *r.running < 0) continue;
    out.push_back(QueueSample{snapshot.taken_at, r.id, *r.waiting, *r.running});
  }
  return out;
}

std::vector<TrendPoint> storage_trend(std::span<const fabric::InfoSnapshot> snapshots, TimeWindow window,
                                      const ScopePredicate& in_scope) {
  std::vector<TrendPoint> out;
  for (const auto& snap : snapshots) {
    if (!window.contains(snap.taken_at)) continue;
    TrendPoint point{snap.taken_at, 0, 0, 0};
    for (const auto& e : storage::compute_filling_rates(snap).entries) {
      if (in_scope && !in_scope(e.storage_id, snap.taken_at)) continue;
      if (e.quality != storage::DataQuality::Ok) {
        ++point.suspect_count;
        continue;
      }
      point.total_used += *e.published_used;
      point.total_capacity += *e.published_used + *e.published_free;
    }
    out.push_back(point);
  }
  return out;
}

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no, std::string_view column) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    raise(ErrorCode::ParseError, fmt::format("line {}: bad {} '{}'", line_no, column, field));
  return value;
}

}  // namespace

std::vector<UsageRecord> parse_usage_csv(std::string_view text) {
  std::vector<UsageRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() == 7 && fields[0] == "user") continue;
    }
    if (fields.size() != 7)
      raise(ErrorCode::ParseError, fmt::format("line {}: expected 7 columns, got {}", line_no, fields.size()));
    UsageRecord r;
    if (!fields[0].empty()) r.user = std::string(fields[0]);
    r.site = std::string(fields[1]);
    if (!fields[2].empty()) r.subgroup = std::string(fields[2]);
    r.period.start = parse_number<Timestamp>(fields[3], line_no, "t0");
    r.period.end = parse_number<Timestamp>(fields[4], line_no, "t1");
    r.cpu_hours = parse_number<double>(fields[5], line_no, "cpu_hours");
    r.jobs = parse_number<std::int64_t>(fields[6], line_no, "jobs");
    out.push_back(std::move(r));
  }
  return out;
}

std::string report_csv(const AccountingReport& report) {
  std::string out = "group,cpu_hours,jobs\n";
  for (const auto& row : report.rows) out += fmt::format("{},{:.6f},{:.6f}\n", row.key, row.cpu_hours, row.jobs);
  return out;
}

nlohmann::ordered_json to_ordered_json(const AccountingReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["key"] = row.key;
    r["cpu_hours"] = row.cpu_hours;
    r["jobs"] = row.jobs;
    rows.push_back(std::move(r));
  }
  nlohmann::ordered_json out;
  out["window_start"] = report.window.start;
  out["window_end"] = report.window.end;
  out["group_by"] = to_string(report.group_by);
  out["records"] = report.records;
  out["completeness"] = report.completeness;
  out["rows"] = std::move(rows);
  return out;
}

std::string_view to_string(GroupBy g) {
  switch (g) {
    case GroupBy::User: return "User";
    case GroupBy::Site: return "Site";
    case GroupBy::Subgroup: return "Subgroup";
    case GroupBy::WholeVO: return "WholeVO";
  }
  return "?";
}

GroupBy group_by_from_string(std::string_view text) {
  for (auto g : {GroupBy::User, GroupBy::Site, GroupBy::Subgroup, GroupBy::WholeVO}) {
    if (to_string(g) == text) return g;
  }
  if (text == "user") return GroupBy::User;
  if (text == "site") return GroupBy::Site;
  if (text == "subgroup") return GroupBy::Subgroup;
  if (text == "vo") return GroupBy::WholeVO;
  raise(ErrorCode::InvalidArgument, fmt::format("unknown grouping '{}'", text));
}

void to_json(nlohmann::json& j, const UsageRecord& r) {
  j = nlohmann::json{{"user", r.user ? nlohmann::json(*r.user) : nlohmann::json(nullptr)},
                     {"site", r.site},
                     {"subgroup", r.subgroup ? nlohmann::json(*r.subgroup) : nlohmann::json(nullptr)},
                     {"t0", r.period.start},
                     {"t1", r.period.end},
                     {"cpu_hours", r.cpu_hours},
                     {"jobs", r.jobs}};
}

void from_json(const nlohmann::json& j, UsageRecord& r) {
  r = UsageRecord{};
  if (j.contains("user") && !j.at("user").is_null() && !j.at("user").get<std::string>().empty())
    r.user = j.at("user").get<std::string>();
  r.site = j.at("site").get<std::string>();
  if (j.contains("subgroup") && !j.at("subgroup").is_null()) r.subgroup = j.at("subgroup").get<std::string>();
  r.period = TimeWindow{j.at("t0").get<Timestamp>(), j.at("t1").get<Timestamp>()};
  r.cpu_hours = j.at("cpu_hours").get<double>();
  r.jobs = j.value("jobs", std::int64_t{0});
}

}  // namespace gridops::accounting
