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

// Incident tickets, duty-shift rotation, take-over reports and support
// impact metrics.

#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridops/core.hpp"
#include "gridops/probes.hpp"

namespace gridops::incidents {

enum class TicketKind { SE, CE, WMS, User, Other };
enum class TicketStatus { Open, InProgress, OnHold, Solved, Closed };
enum class StepAction { Comment, Assign, StatusChange, LinkAlarm };

struct TicketStep {
  Timestamp at = 0;
  std::string author;
  StepAction action = StepAction::Comment;
  std::string payload;

  bool operator==(const TicketStep&) const = default;
};

struct Ticket {
  std::string id;
  TicketKind kind = TicketKind::Other;
  std::optional<ResourceId> resource;
  Timestamp opened_at = 0;
  std::optional<Timestamp> closed_at;
  TicketStatus status = TicketStatus::Open;
  std::vector<TicketStep> steps;
  std::set<std::string> participants;

  /// Optimistic-concurrency token: the number of recorded steps.
  std::size_t version() const { return steps.size(); }
  Timestamp last_activity() const { return steps.empty() ? opened_at : steps.back().at; }
  bool active() const {
    return status == TicketStatus::Open || status == TicketStatus::InProgress || status == TicketStatus::OnHold;
  }
  bool operator==(const Ticket&) const = default;
};

/// Creates an Open ticket with one creation step. SE, CE and WMS tickets need
/// a resource; a User ticket without one needs a payload naming the user.
Ticket open_ticket(std::string id, TicketKind kind, std::optional<ResourceId> resource, Timestamp opened_at,
                   const std::string& author, const std::string& payload = {});

Ticket add_step(Ticket ticket, TicketStep step);

bool is_legal_transition(TicketStatus from, TicketStatus to);
Ticket transition(Ticket ticket, TicketStatus to, Timestamp at, const std::string& author);

struct ShiftSchedule {
  std::vector<std::string> teams;
  int shift_length_days = 7;
  std::chrono::sys_days epoch{};
};

std::string on_duty(const ShiftSchedule& schedule, std::chrono::sys_days date);

inline constexpr Timestamp kStalledAfter = 7 * kMinutesPerDay;

struct TakeoverReport {
  Timestamp at = 0;
  std::vector<Ticket> open_tickets;  // oldest first
  std::vector<probes::Alarm> unticketed_alarms;
  std::vector<Ticket> stalled;

  bool empty() const { return open_tickets.empty() && unticketed_alarms.empty() && stalled.empty(); }
  std::string render() const;
};

TakeoverReport takeover_report(std::span<const Ticket> tickets, std::span<const probes::Alarm> alarms,
                               Timestamp at);

struct SupportMetrics {
  TimeWindow window;
  std::size_t opened = 0;
  std::size_t solved = 0;
  double tickets_per_week = 0.0;
  std::optional<double> mean_days_to_solve;
  std::optional<double> mean_steps;
  std::optional<double> mean_people;
  std::map<std::pair<std::string, TicketKind>, std::size_t> histogram;  // (YYYY-MM, kind)
};

/// Means are over tickets whose solve time falls in the window. `epoch` is the
/// calendar date of timestamp 0, used for the monthly histogram.
SupportMetrics compute_support_metrics(std::span<const Ticket> tickets, TimeWindow window,
                                       std::chrono::sys_days epoch = std::chrono::sys_days{});

std::string metrics_csv(const SupportMetrics& metrics);
std::string histogram_csv(const SupportMetrics& metrics);
nlohmann::ordered_json to_ordered_json(const SupportMetrics& metrics);

/// Per-ticket serialized store. Every mutation is also emitted as an event
/// that replays to the same state.
class TicketBook {
 public:
  const Ticket& open(TicketKind kind, std::optional<ResourceId> resource, Timestamp at, const std::string& author,
                     const std::string& payload = {});
  const Ticket& add_step(const std::string& id, TicketStep step,
                         std::optional<std::size_t> expected_version = std::nullopt);
  const Ticket& transition(const std::string& id, TicketStatus to, Timestamp at, const std::string& author,
                           std::optional<std::size_t> expected_version = std::nullopt);

  const Ticket& get(const std::string& id) const;
  std::vector<Ticket> all() const;
  std::size_t size() const { return tickets_.size(); }

  /// Events produced since construction or the last drain.
  std::vector<nlohmann::json> drain_events();
  void apply_event(const nlohmann::json& event);

  bool operator==(const TicketBook& other) const { return tickets_ == other.tickets_ && next_id_ == other.next_id_; }

 private:
  Ticket& mutable_ticket(const std::string& id, std::optional<std::size_t> expected_version);

  std::map<std::string, Ticket> tickets_;
  std::uint64_t next_id_ = 1;
  std::vector<nlohmann::json> events_;
};

std::string_view to_string(TicketKind kind);
std::string_view to_string(TicketStatus status);
std::string_view to_string(StepAction action);
TicketKind ticket_kind_from_string(std::string_view text);
TicketStatus ticket_status_from_string(std::string_view text);
StepAction step_action_from_string(std::string_view text);

nlohmann::ordered_json to_ordered_json(const Ticket& ticket);

}  // namespace gridops::incidents
