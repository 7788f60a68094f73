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

#ifndef NLUFORGE_HTTP_WORKER_H_
#define NLUFORGE_HTTP_WORKER_H_

#include <functional>
#include <string>

#include "nluforge/scheduler.h"

namespace nluforge {

// Talks to a WorkerServer. `on_shutdown` runs once from Shutdown(), e.g. to
// terminate the process behind the endpoint.
class HttpWorkerHandle : public WorkerHandle {
 public:
  HttpWorkerHandle(std::string host, int port, std::function<void()> on_shutdown = {});
  ~HttpWorkerHandle() override;

  std::string endpoint() const override;
  Dispatch Submit(const JobSpec& spec) override;
  std::optional<UtilizationReport> Poll() override;
  std::optional<WorkerJobView> FetchJob(const std::string& job_id) override;
  void Shutdown() override;

  // GET /logs/{id}; nullopt if unreachable or unknown.
  std::optional<std::string> FetchLogs(const std::string& job_id);

 private:
  std::string host_;
  int port_;
  std::function<void()> on_shutdown_;
  bool shut_down_ = false;
};

}  // namespace nluforge

#endif  // NLUFORGE_HTTP_WORKER_H_
