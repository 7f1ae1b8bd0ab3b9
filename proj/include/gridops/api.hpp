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

// HTTP/JSON interface over a Service.

#pragma once

#include <memory>
#include <optional>
#include <string>

#include "gridops/core.hpp"
#include "gridops/service.hpp"

namespace gridops::api {

struct ApiOptions {
  /// When set, every request must carry it in X-Auth-Token.
  std::optional<std::string> token;
};

/// HTTP status used for an error code.
int http_status(ErrorCode code);

class ApiServer {
 public:
  explicit ApiServer(service::Service& service, ApiOptions options = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds to `port`, or to a free port when `port` is 0. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); requires bind().
  void serve();
  /// serve() on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gridops::api
