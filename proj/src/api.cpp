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

#include "gridops/api.hpp"

#include <thread>

#include <fmt/format.h>

#include "httplib.h"

namespace gridops::api {

using nlohmann::json;
using nlohmann::ordered_json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::DuplicateId:
      return 400;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownResource:
    case ErrorCode::FileNotFound:
      return 404;
    case ErrorCode::Conflict:
    case ErrorCode::AlreadyExists:
    case ErrorCode::AlreadyInconsistent:
    case ErrorCode::StorageFull:
    case ErrorCode::Unavailable:
      return 409;
    case ErrorCode::IllegalTransition:
      return 422;
  }
  return 500;
}

namespace {

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  ordered_json body;
  body["error"]["code"] = code;
  body["error"]["message"] = message;
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void send_json(httplib::Response& res, const ordered_json& doc, int status = 200) {
  res.status = status;
  res.set_content(doc.dump(2) + "\n", "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::ParseError, fmt::format("request body is not JSON: {}", e.what()));
  }
}

template <typename T>
std::optional<T> optional_field(const json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
  return body.at(key).get<T>();
}

std::string required_string(const json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_string())
    raise(ErrorCode::InvalidArgument, fmt::format("missing field '{}'", key));
  return body.at(key).get<std::string>();
}

// The expected version may come from the body or an If-Match header.
std::optional<std::size_t> expected_version(const httplib::Request& req, const json& body) {
  if (auto v = optional_field<std::size_t>(body, "version")) return v;
  if (req.has_header("If-Match")) {
    std::string text = req.get_header_value("If-Match");
    std::erase(text, '"');
    try {
      return static_cast<std::size_t>(std::stoull(text));
    } catch (const std::exception&) {
      raise(ErrorCode::InvalidArgument, "If-Match must be a ticket version");
    }
  }
  return std::nullopt;
}

}  // namespace

struct ApiServer::Impl {
  service::Service& service;
  ApiOptions options;
  httplib::Server server;
  std::thread thread;

  Impl(service::Service& s, ApiOptions o) : service(s), options(std::move(o)) { install(); }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Maps domain errors onto HTTP statuses.
  static Handler guarded(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
      try {
        inner(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), to_string(e.code()), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, to_string(ErrorCode::InvalidArgument), e.what());
      }
    };
  }

  void report_route(const std::string& path, const std::string& name) {
    server.Get(path, guarded([this, name](const httplib::Request& req, httplib::Response& res) {
      service::ReportRequest request{name, "json", {}};
      for (const auto& [key, value] : req.params) {
        if (key == "format") {
          request.format = value;
        } else {
          request.params[key] = value;
        }
      }
      if (!req.has_param("format") && req.get_header_value("Accept") == "text/csv") request.format = "csv";
      const auto rendered = service.read([&](const service::Operations& ops) { return ops.report(request); });
      res.set_content(rendered.body, rendered.content_type);
    }));
  }

  void install() {
    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (options.token && req.get_header_value("X-Auth-Token") != *options.token) {
        send_error(res, 401, "Unauthorized", "missing or wrong X-Auth-Token");
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });

    for (const auto& name : service::report_names()) report_route("/" + name, name);

    server.Get(R"(/tickets/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      send_json(res, service.read([&](const service::Operations& ops) {
        return incidents::to_ordered_json(ops.tickets().get(id));
      }));
    }));

    server.Post("/tickets", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const auto kind = incidents::ticket_kind_from_string(required_string(body, "kind"));
      const auto ticket = service.write([&](service::Operations& ops) {
        return ops.open_ticket(kind, optional_field<std::string>(body, "resource"), required_string(body, "author"),
                               body.value("payload", std::string{}), optional_field<std::string>(body, "alarm"),
                               optional_field<Timestamp>(body, "at"));
      });
      send_json(res, incidents::to_ordered_json(ticket), 201);
    }));

    server.Post(R"(/tickets/([^/]+)/steps)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      const json body = parse_body(req);
      const auto action = incidents::step_action_from_string(body.value("action", std::string("Comment")));
      const auto version = expected_version(req, body);
      const auto ticket = service.write([&](service::Operations& ops) {
        return ops.add_ticket_step(id, required_string(body, "author"), action, body.value("payload", std::string{}),
                                   optional_field<Timestamp>(body, "at"), version);
      });
      send_json(res, incidents::to_ordered_json(ticket), 201);
    }));

    server.Post(R"(/tickets/([^/]+)/transition)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  const json body = parse_body(req);
                  const auto status = incidents::ticket_status_from_string(required_string(body, "status"));
                  const auto version = expected_version(req, body);
                  const auto ticket = service.write([&](service::Operations& ops) {
                    return ops.transition_ticket(id, status, required_string(body, "author"),
                                                 optional_field<Timestamp>(body, "at"), version);
                  });
                  send_json(res, incidents::to_ordered_json(ticket));
                }));

    server.Post("/decommission/plan", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const auto source = required_string(body, "source");
      const auto placement = storage::placement_from_string(body.value("placement", std::string("MostFreeFirst")));
      const bool whitelist_targets = body.value("whitelist_targets", true);
      const auto plan = service.write([&](service::Operations& ops) {
        return ops.plan_decommission(source, placement, whitelist_targets);
      });
      send_json(res, storage::to_ordered_json(plan), 201);
    }));

    server.Get(R"(/decommission/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      send_json(res, service.read([&](const service::Operations& ops) { return storage::to_ordered_json(ops.plan(id)); }));
    }));

    server.Post(R"(/decommission/([^/]+)/execute)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  const auto plan = service.write([&](service::Operations& ops) { return ops.execute_plan(id); });
                  send_json(res, storage::to_ordered_json(plan));
                }));

    server.Post("/faults", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const auto resource = required_string(body, "resource");
      if (body.value("clear", false)) {
        service.write([&](service::Operations& ops) { ops.clear_fault(resource); });
      } else {
        if (!body.contains("fault")) raise(ErrorCode::InvalidArgument, "missing field 'fault'");
        json fault = body.at("fault");
        const Timestamp now = service.read([](const service::Operations& ops) { return ops.now(); });
        if (!fault.contains("since")) fault["since"] = now;
        const auto spec = fault.get<fabric::FaultSpec>();
        service.write([&](service::Operations& ops) { ops.inject_fault(resource, spec); });
      }
      send_json(res, ordered_json{{"resource", resource}, {"status", "ok"}});
    }));

    server.Post("/downtimes", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const auto window = topology::make_downtime(required_string(body, "resource"), body.at("start").get<Timestamp>(),
                                                  body.at("end").get<Timestamp>(), body.value("reason", std::string{}));
      service.write([&](service::Operations& ops) { ops.add_downtime(window); });
      send_json(res, ordered_json{{"resource", window.id}, {"status", "ok"}}, 201);
    }));

    server.Post("/cycles", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const auto count = body.value("count", std::size_t{1});
      const auto summary = service.write([&](service::Operations& ops) {
        for (std::size_t i = 0; i < count; ++i) ops.run_cycle();
        return ops.summary();
      });
      send_json(res, summary.to_json());
    }));

    server.Post("/usage", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::vector<accounting::UsageRecord> records;
      if (req.get_header_value("Content-Type").starts_with("text/csv")) {
        records = accounting::parse_usage_csv(req.body);
      } else {
        const json body = parse_body(req);
        records = (body.is_array() ? body : body.at("records")).get<std::vector<accounting::UsageRecord>>();
      }
      const auto result = service.write([&](service::Operations& ops) { return ops.ingest_usage(records); });
      ordered_json doc;
      doc["accepted"] = result.accepted;
      doc["rejected"] = ordered_json::array();
      for (const auto& r : result.rejected) doc["rejected"].push_back(ordered_json{{"index", r.index}, {"reason", r.reason}});
      send_json(res, doc);
    }));

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.body.empty() && res.status == 404) {
        send_error(res, 404, "NotFound", fmt::format("no route for {} {}", req.method, req.path));
      }
    });
  }
};

ApiServer::ApiServer(service::Service& service, ApiOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) raise(ErrorCode::Unavailable, fmt::format("cannot bind {}", host));
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) raise(ErrorCode::Unavailable, fmt::format("cannot bind {}:{}", host, port));
  return port;
}

void ApiServer::serve() { impl_->server.listen_after_bind(); }

void ApiServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace gridops::api
