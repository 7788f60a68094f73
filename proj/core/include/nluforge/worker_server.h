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

#ifndef NLUFORGE_WORKER_SERVER_H_
#define NLUFORGE_WORKER_SERVER_H_

#include <memory>
#include <string>

#include "nluforge/worker.h"

namespace nluforge {

// HTTP front for a Worker:
//   POST /train, POST /test   JobSpec -> 202 {job_id} | 409 busy | 400
//   GET  /is_free             UtilizationReport
//   GET  /jobs/{id}           worker-side job state and result
//   GET  /logs/{id}           plain-text log tail
class WorkerServer {
 public:
  explicit WorkerServer(Worker& worker);
  ~WorkerServer();

  // Port 0 picks a free port. Returns the bound port; throws
  // Error(kUnavailable) when binding fails.
  int Bind(const std::string& host, int port);
  // Serves until Stop().
  void Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nluforge

#endif  // NLUFORGE_WORKER_SERVER_H_
