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

#include "gridops/incidents.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace gridops::incidents {

using nlohmann::json;
using nlohmann::ordered_json;

Ticket open_ticket(std::string id, TicketKind kind, std::optional<ResourceId> resource, Timestamp opened_at,
                   const std::string& author, const std::string& payload) {
  const bool needs_resource = kind == TicketKind::SE || kind == TicketKind::CE || kind == TicketKind::WMS;
  if (resource && resource->empty()) resource.reset();
  if (needs_resource && !resource)
    raise(ErrorCode::InvalidArgument, fmt::format("{} ticket requires a resource id", to_string(kind)));
  if (kind == TicketKind::User && !resource && payload.empty())
    raise(ErrorCode::InvalidArgument, "User ticket without a resource must name the user in its payload");
  if (author.empty()) raise(ErrorCode::InvalidArgument, "ticket author is required");

  Ticket t;
  t.id = std::move(id);
  t.kind = kind;
  t.resource = std::move(resource);
  t.opened_at = opened_at;
  t.steps.push_back(TicketStep{opened_at, author, StepAction::Comment, payload.empty() ? "opened" : payload});
  t.participants.insert(author);
  return t;
}

Ticket add_step(Ticket ticket, TicketStep step) {
  if (ticket.status == TicketStatus::Closed)
    raise(ErrorCode::IllegalTransition, fmt::format("ticket {} is Closed", ticket.id));
  if (!ticket.steps.empty() && step.at < ticket.steps.back().at) {
    raise(ErrorCode::InvalidArgument,
          fmt::format("step at {} precedes the last step at {}", step.at, ticket.steps.back().at));
  }
  if (step.author.empty()) raise(ErrorCode::InvalidArgument, "step author is required");
  ticket.participants.insert(step.author);
  ticket.steps.push_back(std::move(step));
  return ticket;
}

bool is_legal_transition(TicketStatus from, TicketStatus to) {
  using S = TicketStatus;
  switch (from) {
    case S::Open: return to == S::InProgress || to == S::OnHold || to == S::Solved;
    case S::InProgress: return to == S::OnHold || to == S::Solved;
    case S::OnHold: return to == S::InProgress;
    case S::Solved: return to == S::Closed || to == S::InProgress;
    case S::Closed: return false;
  }
  return false;
}

Ticket transition(Ticket ticket, TicketStatus to, Timestamp at, const std::string& author) {
  if (!is_legal_transition(ticket.status, to)) {
    raise(ErrorCode::IllegalTransition,
          fmt::format("illegal transition {} -> {}", to_string(ticket.status), to_string(to)));
  }
  const TicketStatus from = ticket.status;
  ticket = add_step(std::move(ticket), TicketStep{at, author, StepAction::StatusChange,
                                                  fmt::format("{} -> {}", to_string(from), to_string(to))});
  ticket.status = to;
  if (to == TicketStatus::Solved) ticket.closed_at = at;
  if (from == TicketStatus::Solved && to == TicketStatus::InProgress) ticket.closed_at.reset();
  return ticket;
}

std::string on_duty(const ShiftSchedule& schedule, std::chrono::sys_days date) {
  if (schedule.teams.empty()) raise(ErrorCode::InvalidArgument, "shift schedule has no teams");
  if (schedule.shift_length_days < 1) raise(ErrorCode::InvalidArgument, "shift length must be >= 1 day");
  if (date < schedule.epoch) raise(ErrorCode::InvalidArgument, "date precedes the schedule epoch");
  const auto days = (date - schedule.epoch).count();
  const auto shift = days / schedule.shift_length_days;
  return schedule.teams[static_cast<std::size_t>(shift % static_cast<long>(schedule.teams.size()))];
}

TakeoverReport takeover_report(std::span<const Ticket> tickets, std::span<const probes::Alarm> alarms,
                               Timestamp at) {
  TakeoverReport report;
  report.at = at;
  for (const auto& t : tickets) {
    if (!t.active()) continue;
    report.open_tickets.push_back(t);
    if (t.last_activity() < at - kStalledAfter) report.stalled.push_back(t);
  }
  auto oldest_first = [](const Ticket& a, const Ticket& b) {
    return a.opened_at != b.opened_at ? a.opened_at < b.opened_at : a.id < b.id;
  };
  std::sort(report.open_tickets.begin(), report.open_tickets.end(), oldest_first);
  std::sort(report.stalled.begin(), report.stalled.end(), oldest_first);
  for (const auto& a : alarms) {
    if (a.open() && !a.linked_ticket) report.unticketed_alarms.push_back(a);
  }
  return report;
}

std::string TakeoverReport::render() const {
  std::string out = fmt::format("take-over report at t={}\n", at);
  if (empty()) return out + "clean handover: nothing open\n";
  out += fmt::format("open tickets: {}\n", open_tickets.size());
  for (const auto& t : open_tickets) {
    out += fmt::format("  {} [{}] {} opened t={} status {}\n", t.id, to_string(t.kind), t.resource.value_or("-"),
                       t.opened_at, to_string(t.status));
  }
  out += fmt::format("unticketed alarms: {}\n", unticketed_alarms.size());
  for (const auto& a : unticketed_alarms) {
    out += fmt::format("  {} {} {} raised t={}\n", a.id, a.resource, probes::to_string(a.check), a.raised_at);
  }
  out += fmt::format("stalled: {}\n", stalled.size());
  for (const auto& t : stalled) out += fmt::format("  {} last activity t={}\n", t.id, t.last_activity());
  return out;
}

namespace {

std::string month_of(Timestamp t, std::chrono::sys_days epoch) {
  const auto day = epoch + std::chrono::days{t >= 0 ? t / kMinutesPerDay : (t - kMinutesPerDay + 1) / kMinutesPerDay};
  const std::chrono::year_month_day ymd{day};
  return fmt::format("{:04}-{:02}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()));
}

}  // namespace

SupportMetrics compute_support_metrics(std::span<const Ticket> tickets, TimeWindow window,
                                       std::chrono::sys_days epoch) {
  if (!window.well_formed()) raise(ErrorCode::InvalidArgument, "metrics window must satisfy t0 < t1");
  SupportMetrics m;
  m.window = window;
  double days = 0.0;
  double steps = 0.0;
  double people = 0.0;
  for (const auto& t : tickets) {
    if (window.contains(t.opened_at)) {
      ++m.opened;
      ++m.histogram[{month_of(t.opened_at, epoch), t.kind}];
    }
    const bool solved = t.status == TicketStatus::Solved || t.status == TicketStatus::Closed;
    if (solved && t.closed_at && window.contains(*t.closed_at)) {
      ++m.solved;
      days += static_cast<double>(*t.closed_at - t.opened_at) / static_cast<double>(kMinutesPerDay);
      steps += static_cast<double>(t.steps.size());
      people += static_cast<double>(t.participants.size());
    }
  }
  m.tickets_per_week =
      static_cast<double>(m.opened) / (static_cast<double>(window.length()) / static_cast<double>(kMinutesPerWeek));
  if (m.solved > 0) {
    const double n = static_cast<double>(m.solved);
    m.mean_days_to_solve = days / n;
    m.mean_steps = steps / n;
    m.mean_people = people / n;
  }
  return m;
}

std::string metrics_csv(const SupportMetrics& m) {
  std::string out = "window-start,window-end,opened,solved,tickets_per_week,mean_days_to_solve,mean_steps,mean_people\n";
  out += fmt::format("{},{},{},{},{:.6f},{},{},{}\n", m.window.start, m.window.end, m.opened, m.solved,
                     m.tickets_per_week, format_optional(m.mean_days_to_solve), format_optional(m.mean_steps),
                     format_optional(m.mean_people));
  return out;
}

std::string histogram_csv(const SupportMetrics& m) {
  static constexpr TicketKind kKinds[] = {TicketKind::SE, TicketKind::CE, TicketKind::WMS, TicketKind::User,
                                          TicketKind::Other};
  std::set<std::string> months;
  for (const auto& [key, count] : m.histogram) months.insert(key.first);
  std::string out = "month,SE,CE,WMS,User,Other\n";
  for (const auto& month : months) {
    out += month;
    for (auto k : kKinds) {
      auto it = m.histogram.find({month, k});
      out += fmt::format(",{}", it == m.histogram.end() ? 0 : it->second);
    }
    out += '\n';
  }
  return out;
}

ordered_json to_ordered_json(const SupportMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json("undefined"); };
  ordered_json histogram = ordered_json::array();
  for (const auto& [key, count] : m.histogram) {
    ordered_json row;
    row["month"] = key.first;
    row["kind"] = to_string(key.second);
    row["count"] = count;
    histogram.push_back(std::move(row));
  }
  ordered_json out;
  out["window_start"] = m.window.start;
  out["window_end"] = m.window.end;
  out["opened"] = m.opened;
  out["solved"] = m.solved;
  out["tickets_per_week"] = m.tickets_per_week;
  out["mean_days_to_solve"] = opt(m.mean_days_to_solve);
  out["mean_steps"] = opt(m.mean_steps);
  out["mean_people"] = opt(m.mean_people);
  out["histogram"] = std::move(histogram);
  return out;
}

// TicketBook --------------------------------------------------------------------

const Ticket& TicketBook::open(TicketKind kind, std::optional<ResourceId> resource, Timestamp at,
                               const std::string& author, const std::string& payload) {
  std::string id = fmt::format("T-{:06}", next_id_);
  Ticket t = open_ticket(id, kind, resource, at, author, payload);
  ++next_id_;
  json event{{"op", "open"}, {"ticket", id}, {"kind", to_string(kind)},
             {"resource", t.resource ? json(*t.resource) : json(nullptr)},
             {"at", at}, {"author", author}, {"payload", payload}};
  events_.push_back(std::move(event));
  return tickets_[id] = std::move(t);
}

Ticket& TicketBook::mutable_ticket(const std::string& id, std::optional<std::size_t> expected_version) {
  auto it = tickets_.find(id);
  if (it == tickets_.end()) raise(ErrorCode::NotFound, fmt::format("no ticket {}", id));
  if (expected_version && *expected_version != it->second.version()) {
    raise(ErrorCode::Conflict, fmt::format("ticket {} is at version {}, not {}", id, it->second.version(),
                                           *expected_version));
  }
  return it->second;
}

const Ticket& TicketBook::add_step(const std::string& id, TicketStep step,
                                   std::optional<std::size_t> expected_version) {
  Ticket& t = mutable_ticket(id, expected_version);
  json event{{"op", "step"}, {"ticket", id}, {"at", step.at}, {"author", step.author},
             {"action", to_string(step.action)}, {"payload", step.payload}};
  t = incidents::add_step(t, std::move(step));
  events_.push_back(std::move(event));
  return t;
}

const Ticket& TicketBook::transition(const std::string& id, TicketStatus to, Timestamp at,
                                     const std::string& author, std::optional<std::size_t> expected_version) {
  Ticket& t = mutable_ticket(id, expected_version);
  t = incidents::transition(t, to, at, author);
  events_.push_back(json{{"op", "transition"}, {"ticket", id}, {"status", to_string(to)}, {"at", at},
                         {"author", author}});
  return t;
}

const Ticket& TicketBook::get(const std::string& id) const {
  auto it = tickets_.find(id);
  if (it == tickets_.end()) raise(ErrorCode::NotFound, fmt::format("no ticket {}", id));
  return it->second;
}

std::vector<Ticket> TicketBook::all() const {
  std::vector<Ticket> out;
  for (const auto& [id, t] : tickets_) out.push_back(t);
  return out;
}

std::vector<json> TicketBook::drain_events() { return std::exchange(events_, {}); }

void TicketBook::apply_event(const json& event) {
  const std::string op = event.at("op").get<std::string>();
  const std::string id = event.at("ticket").get<std::string>();
  if (op == "open") {
    std::optional<ResourceId> resource;
    if (!event.at("resource").is_null()) resource = event.at("resource").get<std::string>();
    const auto& t = open(ticket_kind_from_string(event.at("kind").get<std::string>()), resource,
                         event.at("at").get<Timestamp>(), event.at("author").get<std::string>(),
                         event.value("payload", std::string{}));
    if (t.id != id) raise(ErrorCode::ParseError, fmt::format("replayed ticket id {} != logged {}", t.id, id));
  } else if (op == "step") {
    add_step(id, TicketStep{event.at("at").get<Timestamp>(), event.at("author").get<std::string>(),
                            step_action_from_string(event.at("action").get<std::string>()),
                            event.value("payload", std::string{})});
  } else if (op == "transition") {
    transition(id, ticket_status_from_string(event.at("status").get<std::string>()), event.at("at").get<Timestamp>(),
               event.at("author").get<std::string>());
  } else {
    raise(ErrorCode::ParseError, fmt::format("unknown ticket event '{}'", op));
  }
  events_.clear();
}

// Names -------------------------------------------------------------------------

std::string_view to_string(TicketKind kind) {
  switch (kind) {
    case TicketKind::SE: return "SE";
    case TicketKind::CE: return "CE";
    case TicketKind::WMS: return "WMS";
    case TicketKind::User: return "User";
    case TicketKind::Other: return "Other";
  }
  return "?";
}

std::string_view to_string(TicketStatus status) {
  switch (status) {
    case TicketStatus::Open: return "Open";
    case TicketStatus::InProgress: return "InProgress";
    case TicketStatus::OnHold: return "OnHold";
    case TicketStatus::Solved: return "Solved";
    case TicketStatus::Closed: return "Closed";
  }
  return "?";
}

std::string_view to_string(StepAction action) {
  switch (action) {
    case StepAction::Comment: return "Comment";
    case StepAction::Assign: return "Assign";
    case StepAction::StatusChange: return "StatusChange";
    case StepAction::LinkAlarm: return "LinkAlarm";
  }
  return "?";
}

TicketKind ticket_kind_from_string(std::string_view text) {
  for (auto k : {TicketKind::SE, TicketKind::CE, TicketKind::WMS, TicketKind::User, TicketKind::Other}) {
    if (to_string(k) == text) return k;
  }
  raise(ErrorCode::InvalidArgument, fmt::format("unknown ticket kind '{}'", text));
}

TicketStatus ticket_status_from_string(std::string_view text) {
  for (auto s : {TicketStatus::Open, TicketStatus::InProgress, TicketStatus::OnHold, TicketStatus::Solved,
                 TicketStatus::Closed}) {
    if (to_string(s) == text) return s;
  }
  raise(ErrorCode::InvalidArgument, fmt::format("unknown ticket status '{}'", text));
}

StepAction step_action_from_string(std::string_view text) {
  for (auto a : {StepAction::Comment, StepAction::Assign, StepAction::StatusChange, StepAction::LinkAlarm}) {
    if (to_string(a) == text) return a;
  }
  raise(ErrorCode::InvalidArgument, fmt::format("unknown step action '{}'", text));
}

ordered_json to_ordered_json(const Ticket& t) {
  ordered_json steps = ordered_json::array();
  for (const auto& s : t.steps) {
    ordered_json row;
    row["at"] = s.at;
    row["author"] = s.author;
    row["action"] = to_string(s.action);
    row["payload"] = s.payload;
    steps.push_back(std::move(row));
  }
  ordered_json out;
  out["id"] = t.id;
  out["kind"] = to_string(t.kind);
  out["resource"] = t.resource ? ordered_json(*t.resource) : ordered_json(nullptr);
  out["opened_at"] = t.opened_at;
  out["closed_at"] = t.closed_at ? ordered_json(*t.closed_at) : ordered_json(nullptr);
  out["status"] = to_string(t.status);
  out["version"] = t.version();
  out["participants"] = t.participants;
  out["steps"] = std::move(steps);
  return out;
}

}  // namespace gridops::incidents
