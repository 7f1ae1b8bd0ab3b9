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

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gridops {

/// Scenario time in whole minutes since the scenario epoch.
using Timestamp = std::int64_t;
/// Byte counts are signed so that corrupted published figures can go negative.
using Bytes = std::int64_t;
using ResourceId = std::string;
using UserId = std::string;

inline constexpr Bytes kKB = 1'000;
inline constexpr Bytes kMB = 1'000'000;
inline constexpr Bytes kGB = 1'000'000'000;
inline constexpr Bytes kTB = 1'000'000'000'000;
inline constexpr Bytes kPB = 1'000'000'000'000'000;

inline constexpr Timestamp kMinutesPerHour = 60;
inline constexpr Timestamp kMinutesPerDay = 24 * kMinutesPerHour;
inline constexpr Timestamp kMinutesPerWeek = 7 * kMinutesPerDay;

/// Half-open time interval [start, end).
struct TimeWindow {
  Timestamp start = 0;
  Timestamp end = 0;

  bool contains(Timestamp t) const { return start <= t && t < end; }
  Timestamp length() const { return end - start; }
  bool well_formed() const { return start < end; }
  bool operator==(const TimeWindow&) const = default;
};

enum class ResourceKind { SE, CE, WMS, Catalogue, VOMS };

std::string_view to_string(ResourceKind kind);
ResourceKind resource_kind_from_string(std::string_view text);

enum class ErrorCode {
  DuplicateId,
  UnknownResource,
  StorageFull,
  Unavailable,
  NotFound,
  AlreadyExists,
  AlreadyInconsistent,
  InvalidArgument,
  IllegalTransition,
  Conflict,
  FileNotFound,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. Callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

/// Renders an optional figure as a number or the literal "undefined".
std::string format_optional(const std::optional<double>& value, int precision = 6);

}  // namespace gridops
