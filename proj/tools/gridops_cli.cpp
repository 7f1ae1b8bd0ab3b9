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

// gridops: headless front end to the operations service.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "gridops/api.hpp"
#include "gridops/service.hpp"

namespace {

using namespace gridops;
using nlohmann::json;
using nlohmann::ordered_json;

struct Globals {
  std::string data_dir;
  std::string format = "json";
};

std::string resolve_data_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("GRIDOPS_DATA_DIR"); env && *env) return env;
  return "gridops-data";
}

service::Operations open_store(const Globals& g) {
  return service::Operations(service::StateStore(resolve_data_dir(g.data_dir)));
}

void print(const std::string& body) { std::cout << body << std::flush; }
void print_json(const ordered_json& doc) { print(doc.dump(2) + "\n"); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::FileNotFound, fmt::format("file not found: {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string summary_csv(const service::ScenarioSummary& s) {
  std::string out =
      "at,probe-results,failed-probes,open-alarms,alarms-raised,findings,flagged-resources,whitelist-size,"
      "heavy-user-storage\n";
  for (const auto& c : s.per_cycle) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", c.at, c.probe_results, c.failed_probes, c.open_alarms,
                       c.alarms_raised, c.findings, c.flagged_resources, c.whitelist_size, c.heavy_user_storage);
  }
  return out;
}

void print_summary(const Globals& g, const service::ScenarioSummary& s) {
  if (g.format == "csv") {
    print(summary_csv(s));
  } else {
    print_json(s.to_json());
  }
}

std::string report_name(const std::string& alias) {
  static const std::map<std::string, std::string> aliases = {
      {"reconcile", "reports/reconciliation"}, {"reconciliation", "reports/reconciliation"},
      {"metrics", "metrics/support"},          {"support", "metrics/support"},
      {"histogram", "metrics/histogram"},      {"accounting", "metrics/accounting"},
      {"queue", "metrics/queue"}};
  auto it = aliases.find(alias);
  return it == aliases.end() ? alias : it->second;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridops: VO grid operations toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--data-dir", g.data_dir, "State directory (default: $GRIDOPS_DATA_DIR or ./gridops-data)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));

  std::function<void()> action;

  // run
  auto* run = app.add_subcommand("run", "Run a scenario, or resume the one in the data directory");
  std::string scenario_path;
  std::optional<std::size_t> max_cycles;
  bool resume = false;
  run->add_option("scenario", scenario_path, "Scenario JSON file");
  run->add_option("--cycles", max_cycles, "Run at most this many cycles");
  run->add_flag("--resume", resume, "Continue the scenario stored in the data directory");
  run->callback([&] {
    action = [&] {
      service::StateStore store(resolve_data_dir(g.data_dir));
      if (resume || scenario_path.empty()) {
        service::Operations ops(std::move(store));
        if (!ops.has_scenario()) raise(ErrorCode::NotFound, "no scenario in the data directory");
        print_summary(g, ops.run(max_cycles));
        return;
      }
      auto config = service::load_scenario(scenario_path);
      auto ops = service::Operations::create(std::move(store), std::move(config));
      print_summary(g, ops.run(max_cycles));
    };
  });

  // cycle
  auto* cycle = app.add_subcommand("cycle", "Run scan cycles beyond or within the planned duration");
  std::size_t cycle_count = 1;
  cycle->add_option("--count", cycle_count, "Number of cycles");
  cycle->callback([&] {
    action = [&] {
      auto ops = open_store(g);
      for (std::size_t i = 0; i < cycle_count; ++i) ops.run_cycle();
      print_summary(g, ops.summary());
    };
  });

  // report
  auto* report = app.add_subcommand("report", "Print a report");
  std::string name;
  std::map<std::string, std::string> params;
  std::string sort, t0, t1, group_by, at, kind, status, mode;
  bool only_open = false;
  report->add_option("name", name, "filling | reconcile | metrics | histogram | accounting | queue | whitelist | ...")
      ->required();
  report->add_option("--format", g.format, "json | csv | text")->check(CLI::IsMember({"json", "csv", "text"}));
  report->add_option("--sort", sort, "rate | id | free");
  report->add_option("--t0", t0, "Window start (minutes or YYYY-MM-DD)");
  report->add_option("--t1", t1, "Window end (minutes or YYYY-MM-DD)");
  report->add_option("--group-by", group_by, "user | site | subgroup | vo");
  report->add_option("--at", at, "Evaluation time for takeover");
  report->add_option("--kind", kind, "Resource kind for availability");
  report->add_option("--status", status, "Ticket status filter");
  report->add_option("--mode", mode, "Ratio mode: sum | mean");
  report->add_flag("--open", only_open, "Only open alarms");
  report->callback([&] {
    action = [&] {
      service::ReportRequest request{report_name(name), g.format, {}};
      const std::pair<const char*, const std::string*> fields[] = {{"sort", &sort},         {"t0", &t0},
                                                                   {"t1", &t1},             {"group_by", &group_by},
                                                                   {"at", &at},             {"kind", &kind},
                                                                   {"status", &status},     {"mode", &mode}};
      for (const auto& [key, value] : fields) {
        if (!value->empty()) request.params[key] = *value;
      }
      if (only_open) request.params["open"] = "true";
      const auto ops = open_store(g);
      print(ops.report(request).body);
    };
  });

  // ticket
  auto* ticket = app.add_subcommand("ticket", "Open and update tickets");
  ticket->require_subcommand(1);
  std::string ticket_id, author = "operator", payload, ticket_kind, resource, alarm, action_name = "Comment";
  std::optional<Timestamp> ticket_at;
  std::optional<std::size_t> version;

  auto* t_open = ticket->add_subcommand("open", "Open a ticket");
  t_open->add_option("--kind", ticket_kind, "SE | CE | WMS | User | Other")->required();
  t_open->add_option("--resource", resource, "Resource id");
  t_open->add_option("--author", author);
  t_open->add_option("--payload", payload);
  t_open->add_option("--alarm", alarm, "Alarm id to link");
  t_open->add_option("--at", ticket_at, "Timestamp in minutes (default: scenario clock)");
  t_open->callback([&] {
    action = [&] {
      auto ops = open_store(g);
      const auto t = ops.open_ticket(incidents::ticket_kind_from_string(ticket_kind),
                                     resource.empty() ? std::nullopt : std::optional(resource), author, payload,
                                     alarm.empty() ? std::nullopt : std::optional(alarm), ticket_at);
      print_json(incidents::to_ordered_json(t));
    };
  });

  auto* t_step = ticket->add_subcommand("step", "Record a step on a ticket");
  t_step->add_option("id", ticket_id)->required();
  t_step->add_option("--action", action_name, "Comment | Assign | LinkAlarm");
  t_step->add_option("--author", author);
  t_step->add_option("--payload", payload);
  t_step->add_option("--at", ticket_at);
  t_step->add_option("--version", version, "Expected ticket version");
  t_step->callback([&] {
    action = [&] {
      auto ops = open_store(g);
      const auto t = ops.add_ticket_step(ticket_id, author, incidents::step_action_from_string(action_name), payload,
                                         ticket_at, version);
      print_json(incidents::to_ordered_json(t));
    };
  });

  auto* t_transition = ticket->add_subcommand("transition", "Change ticket status");
  t_transition->add_option("id", ticket_id)->required();
  t_transition->add_option("--status", status, "InProgress | OnHold | Solved | Closed")->required();
  t_transition->add_option("--author", author);
  t_transition->add_option("--at", ticket_at);
  t_transition->add_option("--version", version);
  t_transition->callback([&] {
    action = [&] {
      auto ops = open_store(g);
      const auto t =
          ops.transition_ticket(ticket_id, incidents::ticket_status_from_string(status), author, ticket_at, version);
      print_json(incidents::to_ordered_json(t));
    };
  });

  auto* t_close = ticket->add_subcommand("close", "Solve (if needed) and close a ticket");
  t_close->add_option("id", ticket_id)->required();
  t_close->add_option("--author", author);
  t_close->add_option("--at", ticket_at);
  t_close->callback([&] {
    action = [&] {
      auto ops = open_store(g);
      if (ops.tickets().get(ticket_id).status != incidents::TicketStatus::Solved) {
        ops.transition_ticket(ticket_id, incidents::TicketStatus::Solved, author, ticket_at);
      }
      const auto t = ops.transition_ticket(ticket_id, incidents::TicketStatus::Closed, author, ticket_at);
      print_json(incidents::to_ordered_json(t));
    };
  });

  // decommission
  auto* decommission = app.add_subcommand("decommission", "Plan and execute SE decommissioning");
  decommission->require_subcommand(1);
  std::string source, placement = "MostFreeFirst", plan_id;
  bool any_target = false;
  auto* d_plan = decommission->add_subcommand("plan", "Draft a migration plan");
  d_plan->add_option("source", source)->required();
  d_plan->add_option("--placement", placement, "MostFreeFirst | RoundRobin");
  d_plan->add_flag("--any-target", any_target, "Allow targets outside the whitelist");
  d_plan->callback([&] {
    action = [&] {
      auto ops = open_store(g);
      print_json(storage::to_ordered_json(
          ops.plan_decommission(source, storage::placement_from_string(placement), !any_target)));
    };
  });
  auto* d_exec = decommission->add_subcommand("execute", "Execute a drafted plan");
  d_exec->add_option("plan", plan_id)->required();
  d_exec->callback([&] {
    action = [&] {
      auto ops = open_store(g);
      const auto plan = ops.execute_plan(plan_id);
      print_json(storage::to_ordered_json(plan));
      if (plan.status == storage::PlanStatus::Aborted) throw std::runtime_error(plan.failure.value_or("aborted"));
    };
  });

  // fault
  auto* fault = app.add_subcommand("fault", "Inject or clear simulated faults");
  fault->require_subcommand(1);
  std::string fault_kind;
  double magnitude = 0.0;
  std::optional<Timestamp> since;
  auto* f_inject = fault->add_subcommand("inject", "Inject a fault");
  f_inject->add_option("resource", resource)->required();
  f_inject->add_option("--kind", fault_kind)->required();
  f_inject->add_option("--magnitude", magnitude);
  f_inject->add_option("--since", since);
  f_inject->callback([&] {
    action = [&] {
      auto ops = open_store(g);
      ops.inject_fault(resource, fabric::FaultSpec{fabric::fault_kind_from_string(fault_kind), magnitude,
                                                   since.value_or(ops.now())});
    };
  });
  auto* f_clear = fault->add_subcommand("clear", "Clear a fault");
  f_clear->add_option("resource", resource)->required();
  f_clear->callback([&] {
    action = [&] {
      auto ops = open_store(g);
      ops.clear_fault(resource);
    };
  });

  // downtime
  auto* downtime = app.add_subcommand("downtime", "Declare a downtime window");
  Timestamp dt_start = 0, dt_end = 0;
  std::string reason;
  downtime->add_option("resource", resource)->required();
  downtime->add_option("--start", dt_start)->required();
  downtime->add_option("--end", dt_end)->required();
  downtime->add_option("--reason", reason);
  downtime->callback([&] {
    action = [&] {
      auto ops = open_store(g);
      ops.add_downtime(topology::make_downtime(resource, dt_start, dt_end, reason));
    };
  });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Ingest usage records (CSV or JSON array)");
  std::string usage_path;
  ingest->add_option("file", usage_path)->required();
  ingest->callback([&] {
    action = [&] {
      const std::string text = read_file(usage_path);
      const bool is_json = usage_path.ends_with(".json");
      const auto records = is_json ? json::parse(text).get<std::vector<accounting::UsageRecord>>()
                                   : accounting::parse_usage_csv(text);
      auto ops = open_store(g);
      const auto result = ops.ingest_usage(records);
      ordered_json doc;
      doc["accepted"] = result.accepted;
      doc["rejected"] = ordered_json::array();
      for (const auto& r : result.rejected) {
        doc["rejected"].push_back(ordered_json{{"index", r.index}, {"reason", r.reason}});
      }
      print_json(doc);
    };
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the HTTP/JSON API");
  int port = 8080;
  std::string host = "127.0.0.1", token;
  serve->add_option("--port", port);
  serve->add_option("--host", host);
  serve->add_option("--token", token, "Require this X-Auth-Token on every request");
  serve->callback([&] {
    action = [&] {
      service::Service svc(open_store(g));
      api::ApiOptions options;
      if (!token.empty()) options.token = token;
      api::ApiServer server(svc, options);
      const int bound = server.bind(host, port);
      std::cerr << fmt::format("listening on {}:{}\n", host, bound);
      server.serve();
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    action();
  } catch (const Error& e) {
    std::cerr << fmt::format("error ({}): {}\n", to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
