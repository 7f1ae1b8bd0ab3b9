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

#include "gridops/service.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace gridops::service {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
std::optional<T> opt_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json opt_value(const auto& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ordered_json ScenarioSummary::to_json() const {
  ordered_json cycles_json = ordered_json::array();
  for (const auto& c : per_cycle) {
    ordered_json row;
    row["at"] = c.at;
    row["probe_results"] = c.probe_results;
    row["failed_probes"] = c.failed_probes;
    row["open_alarms"] = c.open_alarms;
    row["alarms_raised"] = c.alarms_raised;
    row["findings"] = c.findings;
    row["flagged_resources"] = c.flagged_resources;
    row["whitelist_size"] = c.whitelist_size;
    row["heavy_user_storage"] = c.heavy_user_storage;
    cycles_json.push_back(std::move(row));
  }
  ordered_json out;
  out["cycles"] = cycles;
  out["final_clock"] = final_clock;
  out["per_cycle"] = std::move(cycles_json);
  return out;
}

Operations::Operations(StateStore store, ScenarioConfig config, bool has_scenario)
    : store_(std::move(store)),
      config_(std::move(config)),
      has_scenario_(has_scenario),
      fabric_(config_.fabric),
      registry_(config_.effective_registry()),
      downtimes_(config_.downtimes),
      probe_specs_(config_.effective_probes()) {
  for (const auto& e : config_.events) fabric_.schedule(e);
  usage_.ingest(config_.usage);
  refresh_views();
}

namespace {

ScenarioConfig config_of(const StateStore& store) {
  if (auto doc = store.read_scenario()) return scenario_from_json(*doc);
  return ScenarioConfig{};
}

}  // namespace

Operations::Operations(StateStore store) : Operations(store, config_of(store), store.has_scenario()) {
  replay();
}

Operations Operations::create(StateStore store, ScenarioConfig config) {
  validate(config);
  if (store.has_scenario() || store.count(Log::Journal) > 0)
    raise(ErrorCode::Conflict, "data directory already holds a scenario");
  // Building the fabric validates ids and capacities before anything is written.
  Operations ops(std::move(store), std::move(config), true);
  ops.store_.write_scenario(scenario_to_json(ops.config_));
  ops.persist_snapshots();
  return ops;
}

void Operations::replay() {
  replaying_ = true;
  try {
    for (const auto& command : store_.read(Log::Journal)) dispatch(command);
  } catch (...) {
    replaying_ = false;
    throw;
  }
  replaying_ = false;
  tickets_.drain_events();
}

std::size_t Operations::cycles_remaining() const {
  const std::size_t planned = config_.planned_cycles();
  return planned > history_.size() ? planned - history_.size() : 0;
}

json Operations::execute(const json& command) {
  after_commit_.clear();
  json result;
  try {
    result = dispatch(command);
  } catch (...) {
    after_commit_.clear();
    tickets_.drain_events();
    throw;
  }
  store_.append(Log::Journal, command);
  auto events = tickets_.drain_events();
  store_.append_all(Log::Tickets, events);
  auto pending = std::move(after_commit_);
  after_commit_.clear();
  for (auto& fn : pending) fn();
  return result;
}

void Operations::defer(std::function<void()> fn) {
  if (!replaying_) after_commit_.push_back(std::move(fn));
}

json Operations::dispatch(const json& command) {
  const std::string op = command.at("op").get<std::string>();
  if (op == "cycle") {
    const auto s = do_cycle();
    return json{{"at", s.at}};
  }
  if (op == "fault") {
    fabric_.inject_fault(command.at("resource").get<std::string>(), command.at("fault").get<fabric::FaultSpec>());
    refresh_views();
    return json::object();
  }
  if (op == "clear_fault") {
    fabric_.clear_fault(command.at("resource").get<std::string>());
    refresh_views();
    return json::object();
  }
  if (op == "set_state") {
    fabric_.set_state(command.at("resource").get<std::string>(),
                      fabric::node_state_from_string(command.at("state").get<std::string>()));
    refresh_views();
    return json::object();
  }
  if (op == "downtime") {
    downtimes_.push_back(command.at("window").get<topology::DowntimeWindow>());
    refresh_whitelist();
    return json::object();
  }
  if (op == "ticket_open") {
    auto alarm_id = opt_field<std::string>(command, "alarm");
    if (alarm_id) {
      const probes::Alarm* alarm = alarm_book_.find(*alarm_id);
      if (!alarm) raise(ErrorCode::NotFound, fmt::format("no alarm {}", *alarm_id));
      if (alarm->linked_ticket)
        raise(ErrorCode::Conflict, fmt::format("alarm {} already linked to {}", *alarm_id, *alarm->linked_ticket));
    }
    const Timestamp at = command.at("at").get<Timestamp>();
    const std::string author = command.at("author").get<std::string>();
    const auto& t = tickets_.open(incidents::ticket_kind_from_string(command.at("kind").get<std::string>()),
                                  opt_field<std::string>(command, "resource"), at, author,
                                  command.value("payload", std::string{}));
    const std::string id = t.id;
    if (alarm_id) {
      tickets_.add_step(id, incidents::TicketStep{at, author, incidents::StepAction::LinkAlarm, *alarm_id});
      alarm_book_.find(*alarm_id)->linked_ticket = id;
      defer([this, line = json(*alarm_book_.find(*alarm_id))] { store_.append(Log::Alarms, line); });
    }
    return json{{"id", id}};
  }
  if (op == "ticket_step") {
    const std::string id = command.at("id").get<std::string>();
    tickets_.add_step(id,
                      incidents::TicketStep{command.at("at").get<Timestamp>(), command.at("author").get<std::string>(),
                                            incidents::step_action_from_string(command.at("action").get<std::string>()),
                                            command.value("payload", std::string{})},
                      opt_field<std::size_t>(command, "version"));
    return json{{"id", id}};
  }
  if (op == "ticket_transition") {
    const std::string id = command.at("id").get<std::string>();
    tickets_.transition(id, incidents::ticket_status_from_string(command.at("status").get<std::string>()),
                        command.at("at").get<Timestamp>(), command.at("author").get<std::string>(),
                        opt_field<std::size_t>(command, "version"));
    return json{{"id", id}};
  }
  if (op == "plan") {
    storage::PlanOptions options;
    options.placement = storage::placement_from_string(command.value("placement", std::string("MostFreeFirst")));
    if (command.value("whitelist_targets", true)) options.eligible_targets = whitelist_.members;
    const auto catalogue = fabric_.catalogue_entries();
    auto plan = storage::plan_decommission(command.at("source").get<std::string>(), vo_set_, snapshot_, catalogue,
                                           storage::inventories_from_fabric(fabric_), options);
    plan.id = fmt::format("P-{:06}", next_plan_++);
    defer([this, name = "plan-" + plan.id + ".json", body = storage::to_ordered_json(plan).dump(2)] {
      store_.write_snapshot(name, body);
    });
    const std::string id = plan.id;
    plans_[id] = std::move(plan);
    return json{{"id", id}};
  }
  if (op == "execute") {
    const std::string id = command.at("plan").get<std::string>();
    auto it = plans_.find(id);
    if (it == plans_.end()) raise(ErrorCode::NotFound, fmt::format("no decommission plan {}", id));
    it->second = storage::execute_migration(fabric_, it->second);
    refresh_views();
    defer([this, name = "plan-" + id + ".json", body = storage::to_ordered_json(it->second).dump(2)] {
      store_.write_snapshot(name, body);
    });
    return json{{"id", id}};
  }
  if (op == "usage") {
    const auto records = command.at("records").get<std::vector<accounting::UsageRecord>>();
    const auto result = usage_.ingest(records);
    std::vector<json> accepted;
    for (const auto& r : records) {
      if (!accounting::validate(r)) accepted.push_back(json(r));
    }
    defer([this, lines = std::move(accepted)] { store_.append_all(Log::Usage, lines); });
    json rejected = json::array();
    for (const auto& r : result.rejected) rejected.push_back(json{{"index", r.index}, {"reason", r.reason}});
    return json{{"accepted", result.accepted}, {"rejected", rejected}};
  }
  raise(ErrorCode::ParseError, fmt::format("unknown journal command '{}'", op));
}

void Operations::refresh_views() {
  snapshot_ = fabric_.publish_info();
  auto previous = vo_set_;
  vo_set_ = topology::merge_topology(registry_, snapshot_, fabric_.now());
  last_diff_ = topology::diff_topology(previous, vo_set_);
  filling_ = storage::compute_filling_rates(snapshot_);
  findings_ = storage::detect_publication_errors(snapshot_, storage::audit_from_fabric(fabric_), config_.detection);
  const auto catalogue = fabric_.catalogue_entries();
  heavy_ = storage::scan_heavy_users(snapshot_, catalogue, config_.heavy_user_threshold, config_.heavy_user_top_n);
  reconciliation_ = storage::reconcile(catalogue, storage::inventories_from_fabric(fabric_), fabric_.now());
  refresh_whitelist();
}

void Operations::refresh_whitelist() {
  whitelist_ = topology::compute_whitelist(vo_set_, topology::active_downtimes(downtimes_, vo_set_.computed_at),
                                           filling_, alarm_book_.alarms, config_.whitelist_policy);
}

CycleSummary Operations::do_cycle() {
  fabric_.advance_clock(config_.scan_interval);
  const Timestamp now = fabric_.now();

  snapshot_ = fabric_.publish_info();
  auto previous = vo_set_;
  vo_set_ = topology::merge_topology(registry_, snapshot_, now);
  last_diff_ = topology::diff_topology(previous, vo_set_);

  const auto results = probes::probe_cycle(fabric_, probe_specs_, vo_set_);
  const auto alarms_before = alarm_book_.alarms;
  alarm_book_ = probes::evaluate_alarms(results, std::move(alarm_book_), config_.alarm_policy);

  filling_ = storage::compute_filling_rates(snapshot_);
  findings_ = storage::detect_publication_errors(snapshot_, storage::audit_from_fabric(fabric_), config_.detection);
  const auto catalogue = fabric_.catalogue_entries();
  heavy_ = storage::scan_heavy_users(snapshot_, catalogue, config_.heavy_user_threshold, config_.heavy_user_top_n);
  refresh_whitelist();
  reconciliation_ = storage::reconcile(catalogue, storage::inventories_from_fabric(fabric_), now);

  const auto samples = accounting::queue_samples(snapshot_);
  queue_samples_.insert(queue_samples_.end(), samples.begin(), samples.end());
  const auto in_vo = [this](const ResourceId& id, Timestamp) { return vo_set_.find(id) != nullptr; };
  const auto point = accounting::storage_trend(std::span(&snapshot_, 1), TimeWindow{now, now + 1}, in_vo);
  trend_.insert(trend_.end(), point.begin(), point.end());
  results_.insert(results_.end(), results.begin(), results.end());

  CycleSummary s;
  s.at = now;
  s.probe_results = results.size();
  s.failed_probes = static_cast<std::size_t>(std::count_if(
      results.begin(), results.end(), [](const auto& r) { return r.outcome == probes::Outcome::Fail; }));
  s.open_alarms = alarm_book_.open_alarms().size();
  s.alarms_raised = alarm_book_.alarms.size() - alarms_before.size();
  s.findings = findings_.size();
  s.flagged_resources = storage::flagged_resources(findings_).size();
  s.whitelist_size = whitelist_.members.size();
  s.heavy_user_storage = heavy_.size();
  history_.push_back(s);

  {
    std::vector<json> lines;
    lines.reserve(results.size());
    for (const auto& r : results) lines.push_back(json(r));
    defer([this, lines = std::move(lines)] { store_.append_all(Log::ProbeResults, lines); });

    std::vector<json> changed;
    for (std::size_t i = 0; i < alarm_book_.alarms.size(); ++i) {
      if (i >= alarms_before.size() || !(alarms_before[i] == alarm_book_.alarms[i]))
        changed.push_back(json(alarm_book_.alarms[i]));
    }
    defer([this, changed = std::move(changed)] { store_.append_all(Log::Alarms, changed); });
    defer([this] { persist_snapshots(); });
  }
  return s;
}

void Operations::persist_snapshots() {
  store_.write_snapshot("topology.json", topology::to_feed(vo_set_).dump(2));
  store_.write_snapshot("whitelist.json", topology::to_feed(whitelist_).dump(2));
  store_.write_snapshot("filling.json", storage::to_ordered_json(filling_).dump(2));
  store_.write_snapshot("reconciliation.json", storage::to_ordered_json(reconciliation_).dump(2));
}

CycleSummary Operations::run_cycle() {
  if (!has_scenario_) raise(ErrorCode::InvalidArgument, "no scenario loaded");
  execute(json{{"op", "cycle"}});
  return history_.back();
}

ScenarioSummary Operations::run(std::optional<std::size_t> max_cycles) {
  std::size_t todo = cycles_remaining();
  if (max_cycles) todo = std::min(todo, *max_cycles);
  for (std::size_t i = 0; i < todo; ++i) run_cycle();
  return summary();
}

ScenarioSummary Operations::summary() const {
  return ScenarioSummary{history_.size(), fabric_.now(), history_};
}

void Operations::inject_fault(const ResourceId& resource, fabric::FaultSpec fault) {
  execute(json{{"op", "fault"}, {"resource", resource}, {"fault", fault}});
}

void Operations::clear_fault(const ResourceId& resource) {
  execute(json{{"op", "clear_fault"}, {"resource", resource}});
}

void Operations::set_state(const ResourceId& resource, fabric::NodeState state) {
  execute(json{{"op", "set_state"}, {"resource", resource}, {"state", fabric::to_string(state)}});
}

void Operations::add_downtime(const topology::DowntimeWindow& window) {
  execute(json{{"op", "downtime"}, {"window", window}});
}

incidents::Ticket Operations::open_ticket(incidents::TicketKind kind, std::optional<ResourceId> resource,
                                          const std::string& author, const std::string& payload,
                                          std::optional<std::string> alarm_id, std::optional<Timestamp> at) {
  json command{{"op", "ticket_open"}, {"kind", incidents::to_string(kind)}, {"resource", opt_value(resource)},
               {"author", author}, {"payload", payload}, {"alarm", opt_value(alarm_id)},
               {"at", at.value_or(fabric_.now())}};
  const json result = execute(command);
  return tickets_.get(result.at("id").get<std::string>());
}

incidents::Ticket Operations::add_ticket_step(const std::string& id, const std::string& author,
                                              incidents::StepAction action, const std::string& payload,
                                              std::optional<Timestamp> at, std::optional<std::size_t> version) {
  const auto& t = tickets_.get(id);
  json command{{"op", "ticket_step"}, {"id", id}, {"author", author}, {"action", incidents::to_string(action)},
               {"payload", payload}, {"at", at.value_or(std::max(fabric_.now(), t.last_activity()))},
               {"version", opt_value(version)}};
  execute(command);
  return tickets_.get(id);
}

incidents::Ticket Operations::transition_ticket(const std::string& id, incidents::TicketStatus status,
                                                const std::string& author, std::optional<Timestamp> at,
                                                std::optional<std::size_t> version) {
  const auto& t = tickets_.get(id);
  json command{{"op", "ticket_transition"}, {"id", id}, {"status", incidents::to_string(status)},
               {"author", author}, {"at", at.value_or(std::max(fabric_.now(), t.last_activity()))},
               {"version", opt_value(version)}};
  execute(command);
  return tickets_.get(id);
}

storage::DecommissionPlan Operations::plan_decommission(const ResourceId& source, storage::Placement placement,
                                                        bool whitelist_targets) {
  const json result = execute(json{{"op", "plan"}, {"source", source}, {"placement", storage::to_string(placement)},
                                   {"whitelist_targets", whitelist_targets}});
  return plans_.at(result.at("id").get<std::string>());
}

storage::DecommissionPlan Operations::execute_plan(const std::string& plan_id) {
  execute(json{{"op", "execute"}, {"plan", plan_id}});
  return plans_.at(plan_id);
}

const storage::DecommissionPlan& Operations::plan(const std::string& plan_id) const {
  auto it = plans_.find(plan_id);
  if (it == plans_.end()) raise(ErrorCode::NotFound, fmt::format("no decommission plan {}", plan_id));
  return it->second;
}

accounting::IngestResult Operations::ingest_usage(const std::vector<accounting::UsageRecord>& records) {
  const json result = execute(json{{"op", "usage"}, {"records", records}});
  accounting::IngestResult out;
  out.accepted = result.at("accepted").get<std::size_t>();
  for (const auto& r : result.at("rejected")) {
    out.rejected.push_back(accounting::Rejection{r.at("index").get<std::size_t>(), r.at("reason").get<std::string>()});
  }
  return out;
}

// Service -----------------------------------------------------------------------

Service::Service(Operations ops)
    : ops_(std::move(ops)), worker_([this](std::stop_token stop) { worker_loop(stop); }) {}

Service::~Service() {
  worker_.request_stop();
  queue_cv_.notify_all();
}

void Service::enqueue(std::function<void()> job) {
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(std::move(job));
  }
  queue_cv_.notify_one();
}

void Service::worker_loop(std::stop_token stop) {
  while (true) {
    std::function<void()> job;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, stop, [this] { return !queue_.empty(); });
      if (queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    job();
  }
}

}  // namespace gridops::service
