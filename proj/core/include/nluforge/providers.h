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

#ifndef NLUFORGE_PROVIDERS_H_
#define NLUFORGE_PROVIDERS_H_

#include <filesystem>
#include <memory>
#include <string>

#include "nluforge/scheduler.h"

namespace nluforge {

struct SubprocessOptions {
  std::filesystem::path worker_binary;  // the nluforge executable
  std::filesystem::path store_root;
  std::filesystem::path run_dir;  // port files and worker logs
  double start_timeout_s = 15.0;
};

// Spawns `nluforge worker` processes on this host, one per instance, each
// serving the worker HTTP protocol on an ephemeral loopback port.
class SubprocessProvider : public InstanceProvider {
 public:
  explicit SubprocessProvider(SubprocessOptions options);
  std::unique_ptr<WorkerHandle> Start(const std::string& instance_id,
                                      const InstanceConfig& config) override;

 private:
  SubprocessOptions options_;
};

// The running executable, for spawning copies of ourselves.
std::filesystem::path CurrentExecutable();

}  // namespace nluforge

#endif  // NLUFORGE_PROVIDERS_H_
