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

#ifndef NLUFORGE_SIM_PROVIDER_H_
#define NLUFORGE_SIM_PROVIDER_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "nluforge/scheduler.h"
#include "nluforge/store.h"
#include "nluforge/worker.h"

namespace nluforge {

// Real workers living in this process, sharing one artifact store.
class InProcessProvider : public InstanceProvider {
 public:
  explicit InProcessProvider(ArtifactStore& store, unsigned grid_parallelism = 0);
  std::unique_ptr<WorkerHandle> Start(const std::string& instance_id,
                                      const InstanceConfig& config) override;

 private:
  ArtifactStore& store_;
  unsigned grid_parallelism_;
};

struct SyntheticOptions {
  double busy_probability = 0.0;           // per dispatch
  double start_failure_probability = 0.0;  // per Start
  std::uint64_t seed = 0;
};

// Workers that execute nothing: a dispatched job runs until the owner calls
// FinishJob. Supports injected busy rejections, failed starts and deaths, for
// driving the scheduler under a fake clock.
class SyntheticProvider : public InstanceProvider {
 public:
  explicit SyntheticProvider(SyntheticOptions options = {});
  std::unique_ptr<WorkerHandle> Start(const std::string& instance_id,
                                      const InstanceConfig& config) override;

  // The instance stops answering; its jobs are abandoned.
  void Kill(const std::string& instance_id);
  std::vector<std::string> RunningJobs(const std::string& instance_id) const;
  // Marks a running job terminal. Returns false if it is not running there.
  bool FinishJob(const std::string& instance_id, const std::string& job_id, bool success);
  std::vector<std::string> LiveInstances() const;
  // Dispatches refused with kBusy, capacity or injected, across all instances.
  std::size_t BusyRejections() const;

  struct State;

 private:
  SyntheticOptions options_;
  std::shared_ptr<std::mutex> mu_;
  std::shared_ptr<std::mt19937_64> rng_;
  std::shared_ptr<std::size_t> busy_rejections_;  // guarded by mu_
  std::map<std::string, std::shared_ptr<State>> instances_;
};

}  // namespace nluforge

#endif  // NLUFORGE_SIM_PROVIDER_H_
