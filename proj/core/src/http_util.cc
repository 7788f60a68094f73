// Copyright 2026 The NLUForge Authors. All Rights Reserved.
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

#include "nluforge/http_util.h"

#include <charconv>

namespace nluforge {

Endpoint ParseEndpoint(std::string_view url) {
  std::string_view rest = url;
  if (rest.rfind("http://", 0) == 0) rest.remove_prefix(7);
  while (!rest.empty() && rest.back() == '/') rest.remove_suffix(1);
  const auto colon = rest.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint '" + std::string(url) + "' has no port");
  }
  Endpoint ep;
  if (colon > 0) ep.host = std::string(rest.substr(0, colon));
  const std::string_view port = rest.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), ep.port);
  if (ec != std::errc() || ptr != port.data() + port.size() || ep.port <= 0 || ep.port > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint '" + std::string(url) + "' has a bad port");
  }
  return ep;
}

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 400;
    case ErrorCode::kParse: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kBusy: return 409;
    case ErrorCode::kFailedPrecondition: return 412;
    case ErrorCode::kValidation: return 422;
    case ErrorCode::kResourceExhausted: return 503;
    case ErrorCode::kUnavailable: return 503;
    case ErrorCode::kIo: return 500;
    case ErrorCode::kInternal: return 500;
  }
  return 500;
}

nlohmann::ordered_json ApiErrorBody(int http_status, std::string_view code,
                                    std::string_view message, const nlohmann::json& details) {
  nlohmann::ordered_json out;
  out["http_status"] = http_status;
  out["code"] = code;
  out["message"] = message;
  out["details"] = details.is_null() ? nlohmann::ordered_json(nullptr)
                                     : nlohmann::ordered_json::parse(details.dump());
  return out;
}

}  // namespace nluforge
