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

#include "nluforge/worker_server.h"

#include "httplib.h"
#include "nluforge/error.h"
#include "nluforge/http_util.h"

namespace nluforge {
namespace {

void SendJson(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, ErrorCode code, const std::string& message) {
  const int status = HttpStatusFor(code);
  SendJson(res, status, ApiErrorBody(status, ErrorCodeName(code), message));
}

}  // namespace

struct WorkerServer::Impl {
  explicit Impl(Worker& w) : worker(w) {}

  void Accept(const httplib::Request& req, httplib::Response& res, bool test_route) {
    JobSpec spec;
    try {
      spec = JobSpecFromJson(nlohmann::json::parse(req.body));
      ValidateJobSpec(spec);
      if ((spec.kind == JobKind::kTest) != test_route) {
        throw Error(ErrorCode::kInvalidArgument,
                    "job kind '" + std::string(JobKindName(spec.kind)) + "' sent to the wrong route");
      }
      if (worker.Submit(spec) == Worker::Admission::kBusy) {
        SendError(res, ErrorCode::kBusy, "no free slot");
        return;
      }
    } catch (const nlohmann::json::exception& e) {
      SendError(res, ErrorCode::kInvalidArgument, std::string("malformed body: ") + e.what());
      return;
    } catch (const Error& e) {
      SendError(res, e.code(), e.what());
      return;
    }
    nlohmann::ordered_json body;
    body["job_id"] = spec.job_id;
    SendJson(res, 202, body);
  }

  Worker& worker;
  httplib::Server server;
};

WorkerServer::WorkerServer(Worker& worker) : impl_(std::make_unique<Impl>(worker)) {
  auto& svr = impl_->server;
  Impl* impl = impl_.get();
  svr.Post("/train", [impl](const httplib::Request& req, httplib::Response& res) {
    impl->Accept(req, res, false);
  });
  svr.Post("/test", [impl](const httplib::Request& req, httplib::Response& res) {
    impl->Accept(req, res, true);
  });
  svr.Get("/is_free", [impl](const httplib::Request&, httplib::Response& res) {
    SendJson(res, 200, UtilizationToJson(impl->worker.HandleIsFree()));
  });
  svr.Get(R"(/jobs/([^/]+))", [impl](const httplib::Request& req, httplib::Response& res) {
    auto view = impl->worker.Job(req.matches[1]);
    if (!view) {
      SendError(res, ErrorCode::kNotFound, "unknown job");
      return;
    }
    SendJson(res, 200, WorkerJobToJson(*view));
  });
  svr.Get(R"(/logs/([^/]+))", [impl](const httplib::Request& req, httplib::Response& res) {
    auto text = impl->worker.Logs(req.matches[1]);
    if (!text) {
      SendError(res, ErrorCode::kNotFound, "unknown job");
      return;
    }
    res.set_content(*text, "text/plain");
  });
}

WorkerServer::~WorkerServer() { Stop(); }

int WorkerServer::Bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                        : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) {
    throw Error(ErrorCode::kUnavailable,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void WorkerServer::Listen() { impl_->server.listen_after_bind(); }

void WorkerServer::Stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace nluforge
