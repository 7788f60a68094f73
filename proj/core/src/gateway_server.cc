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

#include "nluforge/gateway_server.h"

#include "httplib.h"
#include "nluforge/error.h"

namespace nluforge {

struct GatewayServer::Impl {
  explicit Impl(Service& s) : service(s) {}

  void Dispatch(const httplib::Request& req, httplib::Response& res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    for (const auto& [k, v] : req.params) api.query.emplace(k, v);
    api.body = req.body;
    ApiResponse out = service.Handle(api);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  }

  Service& service;
  httplib::Server server;
};

GatewayServer::GatewayServer(Service& service, const std::string& ui_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  Impl* impl = impl_.get();
  auto handler = [impl](const httplib::Request& req, httplib::Response& res) {
    impl->Dispatch(req, res);
  };
  const std::string pattern = R"(/api/v1(/.*)?)";
  svr.Get(pattern, handler);
  svr.Post(pattern, handler);
  svr.Patch(pattern, handler);
  svr.Delete(pattern, handler);
  svr.Put(pattern, handler);
  if (!ui_dir.empty() && !svr.set_mount_point("/ui", ui_dir)) {
    throw Error(ErrorCode::kInvalidArgument, "ui_dir '" + ui_dir + "' is not a directory");
  }
}

GatewayServer::~GatewayServer() { Stop(); }

int GatewayServer::Bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) {
    throw Error(ErrorCode::kUnavailable, "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void GatewayServer::Listen() { impl_->server.listen_after_bind(); }

void GatewayServer::Stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace nluforge
