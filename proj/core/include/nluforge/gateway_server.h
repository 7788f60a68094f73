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

#ifndef NLUFORGE_GATEWAY_SERVER_H_
#define NLUFORGE_GATEWAY_SERVER_H_

#include <memory>
#include <string>

#include "nluforge/service.h"

namespace nluforge {

// Serves Service::Handle under /api/v1 and, optionally, a static UI bundle
// under /ui. Stop() lets in-flight requests finish.
class GatewayServer {
 public:
  GatewayServer(Service& service, const std::string& ui_dir = "");
  ~GatewayServer();

  // Port 0 picks a free port; returns the bound port. Throws
  // Error(kUnavailable) when the port is taken.
  int Bind(const std::string& host, int port);
  void Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nluforge

#endif  // NLUFORGE_GATEWAY_SERVER_H_
