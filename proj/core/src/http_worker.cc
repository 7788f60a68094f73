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

#include "nluforge/http_worker.h"

#include "httplib.h"
#include "nluforge/error.h"

namespace nluforge {
namespace {

httplib::Client MakeClient(const std::string& host, int port) {
  httplib::Client client(host, port);
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(10, 0);
  client.set_write_timeout(10, 0);
  return client;
}

}  // namespace

HttpWorkerHandle::HttpWorkerHandle(std::string host, int port, std::function<void()> on_shutdown)
    : host_(std::move(host)), port_(port), on_shutdown_(std::move(on_shutdown)) {}

HttpWorkerHandle::~HttpWorkerHandle() { Shutdown(); }

std::string HttpWorkerHandle::endpoint() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

WorkerHandle::Dispatch HttpWorkerHandle::Submit(const JobSpec& spec) {
  auto client = MakeClient(host_, port_);
  const char* route = spec.kind == JobKind::kTest ? "/test" : "/train";
  auto res = client.Post(route, JobSpecToJson(spec).dump(), "application/json");
  if (!res) return Dispatch::kUnreachable;
  if (res->status == 202) return Dispatch::kAccepted;
  if (res->status == 409) return Dispatch::kBusy;
  return Dispatch::kRejected;
}

std::optional<UtilizationReport> HttpWorkerHandle::Poll() {
  auto client = MakeClient(host_, port_);
  auto res = client.Get("/is_free");
  if (!res || res->status != 200) return std::nullopt;
  try {
    return UtilizationFromJson(nlohmann::json::parse(res->body));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<WorkerJobView> HttpWorkerHandle::FetchJob(const std::string& job_id) {
  auto client = MakeClient(host_, port_);
  auto res = client.Get("/jobs/" + job_id);
  if (!res) throw Error(ErrorCode::kUnavailable, "worker " + endpoint() + " unreachable");
  if (res->status == 404) return std::nullopt;
  if (res->status != 200) throw Error(ErrorCode::kUnavailable, "worker answered " +
                                                                   std::to_string(res->status));
  return WorkerJobFromJson(nlohmann::json::parse(res->body));
}

std::optional<std::string> HttpWorkerHandle::FetchLogs(const std::string& job_id) {
  auto client = MakeClient(host_, port_);
  auto res = client.Get("/logs/" + job_id);
  if (!res || res->status != 200) return std::nullopt;
  return res->body;
}

void HttpWorkerHandle::Shutdown() {
  if (shut_down_) return;
  shut_down_ = true;
  if (on_shutdown_) on_shutdown_();
}

}  // namespace nluforge
