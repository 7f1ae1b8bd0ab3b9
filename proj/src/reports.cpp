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

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "gridops/service.hpp"

namespace gridops::service {

using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<std::string>& report_names() {
  static const std::vector<std::string> names = {
      "topology",        "whitelist",          "filling",           "alarms",         "tickets",
      "metrics/support", "metrics/histogram",  "metrics/accounting", "metrics/queue", "reports/reconciliation",
      "findings",        "heavy-users",        "availability",      "takeover",       "trend",
      "summary",         "cleanup",            "plans"};
  return names;
}

namespace {

using Params = std::map<std::string, std::string>;

std::optional<std::string> param(const Params& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

// Accepts integer minutes or a YYYY-MM-DD date relative to the calendar epoch.
std::optional<Timestamp> time_param(const Params& params, const std::string& key, std::chrono::sys_days epoch) {
  auto text = param(params, key);
  if (!text) return std::nullopt;
  if (text->find('-', 1) != std::string::npos) {
    return (parse_date(*text) - epoch).count() * kMinutesPerDay;
  }
  Timestamp value = 0;
  const char* first = text->data();
  const char* last = first + text->size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) raise(ErrorCode::InvalidArgument, fmt::format("bad {}: '{}'", key, *text));
  return value;
}

TimeWindow window_param(const Params& params, std::chrono::sys_days epoch, TimeWindow fallback) {
  TimeWindow w{time_param(params, "t0", epoch).value_or(fallback.start),
               time_param(params, "t1", epoch).value_or(fallback.end)};
  if (!w.well_formed()) raise(ErrorCode::InvalidArgument, "window end must be after its start");
  return w;
}

Rendered as_json(const ordered_json& doc) { return {"application/json", doc.dump(2) + "\n"}; }
Rendered as_csv(std::string body) { return {"text/csv", std::move(body)}; }
Rendered as_text(std::string body) { return {"text/plain", std::move(body)}; }

std::string members_csv(const topology::VOResourceSet& set) {
  std::string out = "resource-id,kind,presence\n";
  for (const auto& m : set.members) {
    out += fmt::format("{},{},{}\n", m.id, to_string(m.kind), topology::to_string(m.presence));
  }
  return out;
}

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Rendered Operations::report(const ReportRequest& request) const {
  const auto& name = request.name;
  const auto& params = request.params;
  const std::string& format = request.format;
  if (format != "json" && format != "csv" && format != "text")
    raise(ErrorCode::InvalidArgument, fmt::format("unknown format '{}'", format));
  const bool csv = format == "csv";
  const bool text = format == "text";
  const auto epoch = config_.calendar_epoch;
  auto unsupported = [&]() -> Rendered {
    raise(ErrorCode::InvalidArgument, fmt::format("report '{}' has no {} form", name, format));
  };

  if (name == "topology") {
    if (text) return unsupported();
    if (csv) return as_csv(members_csv(vo_set_));
    ordered_json doc = topology::to_feed(vo_set_);
    doc["changes"] = topology::to_feed(last_diff_);
    return as_json(doc);
  }
  if (name == "whitelist") {
    if (text) return unsupported();
    if (csv) {
      std::string out = "resource-id\n";
      for (const auto& id : whitelist_.members) out += id + "\n";
      return as_csv(out);
    }
    return as_json(topology::to_feed(whitelist_));
  }
  if (name == "filling") {
    if (text) return unsupported();
    auto sorted = filling_;
    storage::sort_report(sorted, storage::sort_mode_from_string(param(params, "sort").value_or("rate")));
    return csv ? as_csv(storage::filling_csv(sorted)) : as_json(storage::to_ordered_json(sorted));
  }
  if (name == "alarms") {
    if (csv || text) return unsupported();
    const bool only_open = param(params, "open").value_or("false") == "true";
    ordered_json rows = ordered_json::array();
    for (const auto& a : alarm_book_.alarms) {
      if (!only_open || a.open()) rows.push_back(probes::to_ordered_json(a));
    }
    return as_json(rows);
  }
  if (name == "tickets") {
    if (csv || text) return unsupported();
    const auto status = param(params, "status");
    ordered_json rows = ordered_json::array();
    for (const auto& t : tickets_.all()) {
      if (!status || incidents::to_string(t.status) == *status) rows.push_back(incidents::to_ordered_json(t));
    }
    return as_json(rows);
  }
  if (name == "metrics/support" || name == "metrics/histogram") {
    if (text) return unsupported();
    const auto all = tickets_.all();
    const auto window = window_param(params, epoch, TimeWindow{0, std::max<Timestamp>(now(), kMinutesPerWeek)});
    const auto metrics = incidents::compute_support_metrics(all, window, epoch);
    if (name == "metrics/histogram") {
      if (csv) return as_csv(incidents::histogram_csv(metrics));
      return as_json(incidents::to_ordered_json(metrics).at("histogram"));
    }
    return csv ? as_csv(incidents::metrics_csv(metrics)) : as_json(incidents::to_ordered_json(metrics));
  }
  if (name == "metrics/accounting") {
    if (text) return unsupported();
    TimeWindow span{0, std::max<Timestamp>(now(), 1)};
    if (!usage_.records().empty()) {
      span.start = usage_.records().front().period.start;
      span.end = usage_.records().front().period.end;
      for (const auto& r : usage_.records()) {
        span.start = std::min(span.start, r.period.start);
        span.end = std::max(span.end, r.period.end);
      }
    }
    const auto window = window_param(params, epoch, span);
    const auto group_by = accounting::group_by_from_string(param(params, "group_by").value_or("vo"));
    const auto report = usage_.aggregate(window, group_by);
    return csv ? as_csv(accounting::report_csv(report)) : as_json(accounting::to_ordered_json(report));
  }
  if (name == "metrics/queue") {
    if (csv || text) return unsupported();
    const auto window = window_param(params, epoch, TimeWindow{0, now() + 1});
    const auto mode_text = param(params, "mode").value_or("sum");
    accounting::RatioMode mode;
    if (mode_text == "sum") {
      mode = accounting::RatioMode::SumOverSamples;
    } else if (mode_text == "mean") {
      mode = accounting::RatioMode::MeanOfSampleRatios;
    } else {
      raise(ErrorCode::InvalidArgument, fmt::format("unknown ratio mode '{}'", mode_text));
    }
    const auto ratio = accounting::waiting_running_ratio(queue_samples_, window, mode);
    std::size_t samples = 0;
    for (const auto& s : queue_samples_) samples += window.contains(s.at) ? 1 : 0;
    ordered_json doc;
    doc["window_start"] = window.start;
    doc["window_end"] = window.end;
    doc["mode"] = mode_text;
    doc["samples"] = samples;
    doc["ratio"] = ratio ? ordered_json(*ratio) : ordered_json("undefined");
    return as_json(doc);
  }
  if (name == "reports/reconciliation") {
    if (text) return unsupported();
    return csv ? as_csv(storage::reconciliation_csv(reconciliation_))
               : as_json(storage::to_ordered_json(reconciliation_));
  }
  if (name == "findings") {
    if (text) return unsupported();
    if (csv) {
      std::string out = "resource-id,finding,detail\n";
      for (const auto& row : storage::to_ordered_json(findings_)) {
        out += fmt::format("{},{},{}\n", row.at("resource").get<std::string>(), row.at("finding").get<std::string>(),
                           quote_csv(row.at("detail").get<std::string>()));
      }
      return as_csv(out);
    }
    return as_json(storage::to_ordered_json(findings_));
  }
  if (name == "heavy-users") {
    if (csv) return unsupported();
    if (text) {
      std::string out;
      for (const auto& scan : heavy_) {
        if (!out.empty()) out += "----\n";
        out += scan.notification;
      }
      return as_text(out);
    }
    return as_json(storage::to_ordered_json(heavy_));
  }
  if (name == "availability") {
    if (text) return unsupported();
    std::set<ResourceId> scope;
    const auto kind = param(params, "kind");
    for (const auto& m : vo_set_.members) {
      if (!kind || to_string(m.kind) == *kind) scope.insert(m.id);
    }
    if (scope.empty()) raise(ErrorCode::InvalidArgument, "availability scope is empty");
    const auto window = window_param(params, epoch, TimeWindow{0, now() + 1});
    const auto report = probes::availability_report(results_, scope, window, downtimes_);
    return csv ? as_csv(probes::availability_csv(report)) : as_json(probes::to_ordered_json(report));
  }
  if (name == "takeover") {
    if (csv) return unsupported();
    const auto all = tickets_.all();
    const auto at = time_param(params, "at", epoch).value_or(now());
    const auto report = incidents::takeover_report(all, alarm_book_.alarms, at);
    if (text) return as_text(report.render());
    ordered_json doc;
    doc["at"] = report.at;
    doc["open_tickets"] = ordered_json::array();
    for (const auto& t : report.open_tickets) doc["open_tickets"].push_back(t.id);
    doc["unticketed_alarms"] = ordered_json::array();
    for (const auto& a : report.unticketed_alarms) doc["unticketed_alarms"].push_back(a.id);
    doc["stalled"] = ordered_json::array();
    for (const auto& t : report.stalled) doc["stalled"].push_back(t.id);
    if (!config_.shifts.teams.empty()) {
      const auto day = epoch + std::chrono::days(at / kMinutesPerDay);
      doc["on_duty"] = incidents::on_duty(config_.shifts, day);
    }
    return as_json(doc);
  }
  if (name == "trend") {
    if (text) return unsupported();
    if (csv) {
      std::string out = "at,total-used,total-capacity,suspect\n";
      for (const auto& p : trend_) out += fmt::format("{},{},{},{}\n", p.at, p.total_used, p.total_capacity, p.suspect_count);
      return as_csv(out);
    }
    ordered_json rows = ordered_json::array();
    for (const auto& p : trend_) {
      ordered_json row;
      row["at"] = p.at;
      row["total_used"] = p.total_used;
      row["total_capacity"] = p.total_capacity;
      row["suspect_count"] = p.suspect_count;
      rows.push_back(std::move(row));
    }
    return as_json(rows);
  }
  if (name == "summary") {
    if (csv || text) return unsupported();
    return as_json(summary().to_json());
  }
  if (name == "cleanup") {
    if (csv || text) return unsupported();
    if (!config_.members) raise(ErrorCode::InvalidArgument, "scenario has no membership list");
    const auto catalogue = fabric_.catalogue_entries();
    return as_json(storage::to_ordered_json(storage::cleanup_departed(catalogue, *config_.members)));
  }
  if (name == "plans") {
    if (csv || text) return unsupported();
    ordered_json rows = ordered_json::array();
    for (const auto& [id, plan] : plans_) rows.push_back(storage::to_ordered_json(plan));
    return as_json(rows);
  }
  raise(ErrorCode::NotFound, fmt::format("unknown report '{}'", name));
}

std::string Operations::digest() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash ^= c;
      hash *= 0x100000001b3ULL;
    }
  };
  for (const auto& name : report_names()) {
    if (name == "cleanup" && !config_.members) continue;
    if (name == "availability" && vo_set_.members.empty()) continue;
    mix(name);
    mix(report(ReportRequest{name, "json", {}}).body);
  }
  return fmt::format("{:016x}", hash);
}

}  // namespace gridops::service
