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

#include "gridops/probes.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace gridops::probes {

std::vector<Alarm> AlarmBook::open_alarms() const {
  std::vector<Alarm> out;
  std::copy_if(alarms.begin(), alarms.end(), std::back_inserter(out), [](const Alarm& a) { return a.open(); });
  return out;
}

const Alarm* AlarmBook::open_alarm(const ResourceId& resource, Check check) const {
  for (const auto& a : alarms) {
    if (a.open() && a.resource == resource && a.check == check) return &a;
  }
  return nullptr;
}

Alarm* AlarmBook::find(const std::string& alarm_id) {
  for (auto& a : alarms) {
    if (a.id == alarm_id) return &a;
  }
  return nullptr;
}

Check default_check(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::SE: return Check::SEReadWrite;
    case ResourceKind::CE: return Check::CESubmit;
    case ResourceKind::WMS: return Check::WMSPing;
    case ResourceKind::Catalogue: return Check::CatalogueLookup;
    case ResourceKind::VOMS: return Check::VOMSPing;
  }
  return Check::SEReadWrite;
}

ResourceKind kind_for(Check check) {
  switch (check) {
    case Check::SEReadWrite: return ResourceKind::SE;
    case Check::CESubmit: return ResourceKind::CE;
    case Check::WMSPing: return ResourceKind::WMS;
    case Check::CatalogueLookup: return ResourceKind::Catalogue;
    case Check::VOMSPing: return ResourceKind::VOMS;
  }
  return ResourceKind::SE;
}

std::vector<ProbeSpec> default_probe_specs(Timestamp interval) {
  std::vector<ProbeSpec> out;
  for (auto kind : {ResourceKind::SE, ResourceKind::CE, ResourceKind::WMS, ResourceKind::Catalogue,
                    ResourceKind::VOMS}) {
    out.push_back(ProbeSpec{kind, default_check(kind), interval});
  }
  return out;
}

ProbeResult run_probe(const fabric::Fabric& fabric, const ResourceId& resource, Check check) {
  auto kind = fabric.kind_of(resource);
  if (!kind) raise(ErrorCode::UnknownResource, fmt::format("unknown resource {}", resource));
  if (*kind != kind_for(check)) {
    raise(ErrorCode::InvalidArgument,
          fmt::format("check {} does not apply to {} ({})", to_string(check), resource, to_string(*kind)));
  }

  ProbeResult result{resource, check, fabric.now(), Outcome::Ok, "ok"};
  auto fail = [&result](std::string detail) {
    result.outcome = Outcome::Fail;
    result.detail = std::move(detail);
    return result;
  };

  const auto state = fabric.state_of(resource);
  if (state == fabric::NodeState::Down) return fail("unavailable");
  if (check == Check::SEReadWrite) {
    if (state == fabric::NodeState::Degraded) return fail("degraded");
    if (auto err = fabric.check_writable(resource, 1)) {
      if (err->code() == ErrorCode::StorageFull) return fail("write refused: StorageFull");
      return fail(err->what());
    }
  }
  return result;
}

std::vector<ProbeResult> probe_cycle(const fabric::Fabric& fabric, std::span<const ProbeSpec> specs,
                                     const topology::VOResourceSet& vo_set) {
  std::vector<ProbeResult> out;
  const Timestamp now = fabric.now();
  for (const auto& spec : specs) {
    if (spec.interval <= 0) raise(ErrorCode::InvalidArgument, "probe interval must be > 0");
    if (now % spec.interval != 0) continue;
    for (const auto& member : vo_set.members) {
      if (member.kind != spec.kind) continue;
      if (!fabric.contains(member.id)) {
        out.push_back(ProbeResult{member.id, spec.check, now, Outcome::Fail, "unreachable: unknown resource"});
        continue;
      }
      out.push_back(run_probe(fabric, member.id, spec.check));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ProbeResult& a, const ProbeResult& b) {
    return a.resource != b.resource ? a.resource < b.resource : a.check < b.check;
  });
  return out;
}

AlarmBook evaluate_alarms(std::span<const ProbeResult> results, AlarmBook book, const AlarmPolicy& policy) {
  if (policy.raise_after < 1 || policy.clear_after < 1)
    raise(ErrorCode::InvalidArgument, "alarm policy thresholds must be >= 1");

  std::vector<const ProbeResult*> ordered;
  ordered.reserve(results.size());
  for (const auto& r : results) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](const ProbeResult* a, const ProbeResult* b) {
    if (a->at != b->at) return a->at < b->at;
    if (a->resource != b->resource) return a->resource < b->resource;
    return a->check < b->check;
  });

  for (const ProbeResult* r : ordered) {
    auto& streak = book.streaks[{r->resource, r->check}];
    Alarm* open = nullptr;
    for (auto& a : book.alarms) {
      if (a.open() && a.resource == r->resource && a.check == r->check) open = &a;
    }
    if (r->outcome == Outcome::Fail) {
      ++streak.failures;
      streak.successes = 0;
      if (!open && streak.failures >= policy.raise_after) {
        book.alarms.push_back(Alarm{fmt::format("ALM-{:06}", book.next_id++), r->resource, r->check, r->at,
                                    std::nullopt, streak.failures, std::nullopt});
      }
    } else {
      ++streak.successes;
      streak.failures = 0;
      if (open && streak.successes >= policy.clear_after) open->cleared_at = r->at;
    }
  }
  return book;
}

AvailabilityReport availability_report(std::span<const ProbeResult> results,
                                       const std::set<ResourceId>& scope, TimeWindow window,
                                       std::span<const topology::DowntimeWindow> downtimes) {
  if (scope.empty()) raise(ErrorCode::InvalidArgument, "availability report scope is empty");
  if (!window.well_formed()) raise(ErrorCode::InvalidArgument, "availability window must satisfy t0 < t1");

  AvailabilityReport report;
  report.window = window;
  for (const auto& id : scope) report.per_resource[id];

  for (const auto& r : results) {
    if (!window.contains(r.at)) continue;
    auto it = report.per_resource.find(r.resource);
    if (it == report.per_resource.end()) continue;
    auto& f = it->second;
    ++f.total;
    if (r.outcome == Outcome::Ok) {
      ++f.ok;
    } else {
      const bool excused = std::any_of(downtimes.begin(), downtimes.end(), [&r](const auto& w) {
        return w.id == r.resource && w.covers(r.at);
      });
      if (excused) ++f.failed_in_downtime;
    }
  }

  double avail_sum = 0.0;
  double rel_sum = 0.0;
  std::size_t avail_n = 0;
  std::size_t rel_n = 0;
  for (auto& [id, f] : report.per_resource) {
    if (f.total == 0) continue;
    f.availability = static_cast<double>(f.ok) / static_cast<double>(f.total);
    const std::size_t counted = f.total - f.failed_in_downtime;
    if (counted > 0) f.reliability = static_cast<double>(f.ok) / static_cast<double>(counted);
    avail_sum += *f.availability;
    ++avail_n;
    if (f.reliability) {
      rel_sum += *f.reliability;
      ++rel_n;
    }
    report.aggregate.total += f.total;
    report.aggregate.ok += f.ok;
    report.aggregate.failed_in_downtime += f.failed_in_downtime;
  }
  if (avail_n > 0) report.aggregate.availability = avail_sum / static_cast<double>(avail_n);
  if (rel_n > 0) report.aggregate.reliability = rel_sum / static_cast<double>(rel_n);
  return report;
}

namespace {
std::string csv_figure(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("unknown");
}
}  // namespace

std::string availability_csv(const AvailabilityReport& report) {
  std::string out = "resource-id,window-start,window-end,availability,reliability\n";
  for (const auto& [id, f] : report.per_resource) {
    out += fmt::format("{},{},{},{},{}\n", id, report.window.start, report.window.end,
                       csv_figure(f.availability), csv_figure(f.reliability));
  }
  out += fmt::format("(aggregate),{},{},{},{}\n", report.window.start, report.window.end,
                     csv_figure(report.aggregate.availability), csv_figure(report.aggregate.reliability));
  return out;
}

std::string_view to_string(Check check) {
  switch (check) {
    case Check::SEReadWrite: return "SEReadWrite";
    case Check::CESubmit: return "CESubmit";
    case Check::WMSPing: return "WMSPing";
    case Check::CatalogueLookup: return "CatalogueLookup";
    case Check::VOMSPing: return "VOMSPing";
  }
  return "?";
}

std::string_view to_string(Outcome outcome) { return outcome == Outcome::Ok ? "Ok" : "Fail"; }

Check check_from_string(std::string_view text) {
  for (auto c : {Check::SEReadWrite, Check::CESubmit, Check::WMSPing, Check::CatalogueLookup, Check::VOMSPing}) {
    if (to_string(c) == text) return c;
  }
  raise(ErrorCode::InvalidArgument, fmt::format("unknown check '{}'", text));
}

using nlohmann::json;
using nlohmann::ordered_json;

void to_json(json& j, const ProbeSpec& s) {
  j = json{{"kind", to_string(s.kind)}, {"check", to_string(s.check)}, {"interval", s.interval}};
}

void from_json(const json& j, ProbeSpec& s) {
  s.kind = resource_kind_from_string(j.at("kind").get<std::string>());
  s.check = j.contains("check") ? check_from_string(j.at("check").get<std::string>()) : default_check(s.kind);
  s.interval = j.value("interval", Timestamp{30});
  if (s.interval <= 0) raise(ErrorCode::InvalidArgument, "probe interval must be > 0");
}

void to_json(json& j, const ProbeResult& r) {
  j = json{{"resource", r.resource}, {"check", to_string(r.check)}, {"at", r.at},
           {"outcome", to_string(r.outcome)}, {"detail", r.detail}};
}

void from_json(const json& j, ProbeResult& r) {
  r.resource = j.at("resource").get<std::string>();
  r.check = check_from_string(j.at("check").get<std::string>());
  r.at = j.at("at").get<Timestamp>();
  r.outcome = j.at("outcome").get<std::string>() == "Ok" ? Outcome::Ok : Outcome::Fail;
  r.detail = j.value("detail", std::string{});
}

ordered_json to_ordered_json(const Alarm& a) {
  ordered_json j;
  j["id"] = a.id;
  j["resource"] = a.resource;
  j["check"] = to_string(a.check);
  j["raised_at"] = a.raised_at;
  j["cleared_at"] = a.cleared_at ? ordered_json(*a.cleared_at) : ordered_json(nullptr);
  j["consecutive_failures"] = a.consecutive_failures;
  j["linked_ticket"] = a.linked_ticket ? ordered_json(*a.linked_ticket) : ordered_json(nullptr);
  return j;
}

void to_json(json& j, const Alarm& a) { j = json::parse(to_ordered_json(a).dump()); }

void from_json(const json& j, Alarm& a) {
  a.id = j.at("id").get<std::string>();
  a.resource = j.at("resource").get<std::string>();
  a.check = check_from_string(j.at("check").get<std::string>());
  a.raised_at = j.at("raised_at").get<Timestamp>();
  a.cleared_at.reset();
  if (j.contains("cleared_at") && !j.at("cleared_at").is_null()) a.cleared_at = j.at("cleared_at").get<Timestamp>();
  a.consecutive_failures = j.value("consecutive_failures", 0);
  a.linked_ticket.reset();
  if (j.contains("linked_ticket") && !j.at("linked_ticket").is_null())
    a.linked_ticket = j.at("linked_ticket").get<std::string>();
}

ordered_json to_ordered_json(const AvailabilityReport& report) {
  auto figures = [](const Figures& f) {
    ordered_json j;
    j["availability"] = f.availability ? ordered_json(*f.availability) : ordered_json("unknown");
    j["reliability"] = f.reliability ? ordered_json(*f.reliability) : ordered_json("unknown");
    j["results"] = f.total;
    j["ok"] = f.ok;
    j["failed_in_downtime"] = f.failed_in_downtime;
    return j;
  };
  ordered_json out;
  out["window_start"] = report.window.start;
  out["window_end"] = report.window.end;
  ordered_json rows = ordered_json::array();
  for (const auto& [id, f] : report.per_resource) {
    ordered_json row;
    row["resource"] = id;
    row.update(figures(f));
    rows.push_back(std::move(row));
  }
  out["resources"] = std::move(rows);
  out["aggregate"] = figures(report.aggregate);
  return out;
}

}  // namespace gridops::probes
