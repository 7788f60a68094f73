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

#ifndef NLUFORGE_HTTP_UTIL_H_
#define NLUFORGE_HTTP_UTIL_H_

#include <string>
#include <string_view>

#include "json.hpp"
#include "nluforge/error.h"

namespace nluforge {

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;
};

// Accepts "http://host:port", "host:port" or ":port".
Endpoint ParseEndpoint(std::string_view url);

int HttpStatusFor(ErrorCode code);

// {"http_status", "code", "message", "details"}: the body of every error
// response.
nlohmann::ordered_json ApiErrorBody(int http_status, std::string_view code,
                                    std::string_view message,
                                    const nlohmann::json& details = nullptr);

}  // namespace nluforge

#endif  // NLUFORGE_HTTP_UTIL_H_
