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

// Operational shell: the scenario engine binding every module to the
// simulated fabric, and the single-writer service wrapper used by the API.

#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "gridops/accounting.hpp"
#include "gridops/fabric.hpp"
#include "gridops/incidents.hpp"
#include "gridops/probes.hpp"
#include "gridops/scenario.hpp"
#include "gridops/state_store.hpp"
#include "gridops/storage_ops.hpp"
#include "gridops/topology.hpp"
#include "gridops/whitelist.hpp"

namespace gridops::service {

struct CycleSummary {
  Timestamp at = 0;
  std::size_t probe_results = 0;
  std::size_t failed_probes = 0;
  std::size_t open_alarms = 0;
  std::size_t alarms_raised = 0;
  std::size_t findings = 0;
  std::size_t flagged_resources = 0;
  std::size_t whitelist_size = 0;
  std::size_t heavy_user_storage = 0;

  bool operator==(const CycleSummary&) const = default;
};

struct ScenarioSummary {
  std::size_t cycles = 0;
  Timestamp final_clock = 0;
  std::vector<CycleSummary> per_cycle;

  nlohmann::ordered_json to_json() const;
};

/// A report request as issued by the API or the CLI.
struct ReportRequest {
  std::string name;
  std::string format = "json";  // json | csv | text
  std::map<std::string, std::string> params;
};

struct Rendered {
  std::string content_type;
  std::string body;
};

/// Names accepted by Operations::report.
const std::vector<std::string>& report_names();

class Operations {
 public:
  /// Opens a store. A store holding a scenario is rebuilt by replaying its
  /// journal; an empty store yields an empty fabric.
  explicit Operations(StateStore store);

  /// Starts `config` in an empty store. Throws Conflict if the store already
  /// holds a scenario, InvalidArgument if the config is invalid.
  static Operations create(StateStore store, ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }
  bool has_scenario() const { return has_scenario_; }
  Timestamp now() const { return fabric_.now(); }
  std::size_t cycles_run() const { return history_.size(); }
  std::size_t cycles_remaining() const;
  const std::vector<CycleSummary>& history() const { return history_; }
  const StateStore& store() const { return store_; }

  /// advance clock -> publish -> merge topology -> probes -> alarms ->
  /// filling rates -> publication errors -> heavy users -> whitelist.
  CycleSummary run_cycle();
  /// Runs the remaining planned cycles, at most `max_cycles` of them.
  ScenarioSummary run(std::optional<std::size_t> max_cycles = std::nullopt);
  ScenarioSummary summary() const;

  void inject_fault(const ResourceId& resource, fabric::FaultSpec fault);
  void clear_fault(const ResourceId& resource);
  void set_state(const ResourceId& resource, fabric::NodeState state);
  void add_downtime(const topology::DowntimeWindow& window);

  incidents::Ticket open_ticket(incidents::TicketKind kind, std::optional<ResourceId> resource,
                                const std::string& author, const std::string& payload,
                                std::optional<std::string> alarm_id = std::nullopt,
                                std::optional<Timestamp> at = std::nullopt);
  incidents::Ticket add_ticket_step(const std::string& id, const std::string& author, incidents::StepAction action,
                                    const std::string& payload, std::optional<Timestamp> at = std::nullopt,
                                    std::optional<std::size_t> version = std::nullopt);
  incidents::Ticket transition_ticket(const std::string& id, incidents::TicketStatus status,
                                      const std::string& author, std::optional<Timestamp> at = std::nullopt,
                                      std::optional<std::size_t> version = std::nullopt);

  storage::DecommissionPlan plan_decommission(const ResourceId& source,
                                              storage::Placement placement = storage::Placement::MostFreeFirst,
                                              bool whitelist_targets = true);
  storage::DecommissionPlan execute_plan(const std::string& plan_id);
  const storage::DecommissionPlan& plan(const std::string& plan_id) const;

  accounting::IngestResult ingest_usage(const std::vector<accounting::UsageRecord>& records);

  Rendered report(const ReportRequest& request) const;
  /// Digest over every report in JSON form; equal digests mean equal API views.
  std::string digest() const;

  const fabric::Fabric& fabric() const { return fabric_; }
  const probes::AlarmBook& alarms() const { return alarm_book_; }
  const incidents::TicketBook& tickets() const { return tickets_; }
  const accounting::UsageLedger& usage() const { return usage_; }
  const topology::VOResourceSet& vo_set() const { return vo_set_; }
  const topology::WhiteList& whitelist() const { return whitelist_; }
  const storage::FillingRateReport& filling() const { return filling_; }
  const std::vector<storage::Finding>& findings() const { return findings_; }
  const std::vector<storage::HeavyUserScan>& heavy_users() const { return heavy_; }
  const storage::ReconciliationReport& reconciliation() const { return reconciliation_; }
  const std::vector<probes::ProbeResult>& probe_results() const { return results_; }

 private:
  Operations(StateStore store, ScenarioConfig config, bool has_scenario);

  void replay();
  nlohmann::json execute(const nlohmann::json& command);
  nlohmann::json dispatch(const nlohmann::json& command);
  CycleSummary do_cycle();
  void refresh_views();
  void refresh_whitelist();
  void defer(std::function<void()> fn);
  void persist_snapshots();

  StateStore store_;
  ScenarioConfig config_;
  bool has_scenario_ = false;
  bool replaying_ = false;
  // Side effects of the command being executed, run once it is journaled.
  std::vector<std::function<void()>> after_commit_;

  fabric::Fabric fabric_;
  std::vector<topology::RegistryEntry> registry_;
  std::vector<topology::DowntimeWindow> downtimes_;
  std::vector<probes::ProbeSpec> probe_specs_;

  fabric::InfoSnapshot snapshot_;
  topology::VOResourceSet vo_set_;
  topology::TopologyDiff last_diff_;
  topology::WhiteList whitelist_;
  storage::FillingRateReport filling_;
  std::vector<storage::Finding> findings_;
  std::vector<storage::HeavyUserScan> heavy_;
  storage::ReconciliationReport reconciliation_;

  std::vector<probes::ProbeResult> results_;
  probes::AlarmBook alarm_book_;
  incidents::TicketBook tickets_;
  accounting::UsageLedger usage_;
  std::vector<accounting::QueueSample> queue_samples_;
  std::vector<accounting::TrendPoint> trend_;
  std::map<std::string, storage::DecommissionPlan> plans_;
  std::uint64_t next_plan_ = 1;
  std::vector<CycleSummary> history_;
};

/// Single-writer wrapper: writes are queued to one worker thread and run in
/// submission order; reads run concurrently under a shared lock.
class Service {
 public:
  explicit Service(Operations ops);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  template <typename F>
  auto write(F&& fn) -> std::invoke_result_t<F, Operations&> {
    using R = std::invoke_result_t<F, Operations&>;
    auto task = std::make_shared<std::packaged_task<R()>>([this, f = std::forward<F>(fn)]() mutable -> R {
      std::unique_lock lock(state_mutex_);
      return f(ops_);
    });
    auto result = task->get_future();
    enqueue([task] { (*task)(); });
    return result.get();
  }

  template <typename F>
  auto read(F&& fn) const -> std::invoke_result_t<F, const Operations&> {
    std::shared_lock lock(state_mutex_);
    return fn(static_cast<const Operations&>(ops_));
  }

 private:
  void enqueue(std::function<void()> job);
  void worker_loop(std::stop_token stop);

  Operations ops_;
  mutable std::shared_mutex state_mutex_;
  std::mutex queue_mutex_;
  std::condition_variable_any queue_cv_;
  std::deque<std::function<void()>> queue_;
  std::jthread worker_;
};

}  // namespace gridops::service
