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

#include "gridops/core.hpp"

#include <fmt/format.h>

namespace gridops {

std::string_view to_string(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::SE: return "SE";
    case ResourceKind::CE: return "CE";
    case ResourceKind::WMS: return "WMS";
    case ResourceKind::Catalogue: return "Catalogue";
    case ResourceKind::VOMS: return "VOMS";
  }
  return "?";
}

ResourceKind resource_kind_from_string(std::string_view text) {
  for (auto kind : {ResourceKind::SE, ResourceKind::CE, ResourceKind::WMS,
                    ResourceKind::Catalogue, ResourceKind::VOMS}) {
    if (to_string(kind) == text) return kind;
  }
  raise(ErrorCode::InvalidArgument, fmt::format("unknown resource kind '{}'", text));
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownResource: return "UnknownResource";
    case ErrorCode::StorageFull: return "StorageFull";
    case ErrorCode::Unavailable: return "Unavailable";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::AlreadyExists: return "AlreadyExists";
    case ErrorCode::AlreadyInconsistent: return "AlreadyInconsistent";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "?";
}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

std::string format_optional(const std::optional<double>& value, int precision) {
  if (!value) return "undefined";
  return fmt::format("{:.{}f}", *value, precision);
}

}  // namespace gridops
