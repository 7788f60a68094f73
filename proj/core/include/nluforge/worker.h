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

#ifndef NLUFORGE_WORKER_H_
#define NLUFORGE_WORKER_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "nluforge/job.h"
#include "nluforge/store.h"

namespace nluforge {

struct WorkerOptions {
  std::string instance_id = "local";
  int capacity_slots = 1;
  std::size_t log_tail_lines = 50;
  unsigned grid_parallelism = 0;  // 0: hardware concurrency
};

enum class WorkerJobState { kRunning, kSucceeded, kFailed };

std::string_view WorkerJobStateName(WorkerJobState state);
WorkerJobState ParseWorkerJobState(std::string_view name);

struct WorkerJobView {
  std::string job_id;
  JobKind kind = JobKind::kTrain;
  WorkerJobState state = WorkerJobState::kRunning;
  std::optional<JobResult> result;  // set once terminal
};

nlohmann::ordered_json WorkerJobToJson(const WorkerJobView& view);
WorkerJobView WorkerJobFromJson(const nlohmann::json& object);

// Executes train, grid-search and test jobs against an artifact store.
// At most `capacity_slots` jobs run at once; a job that finds no free slot is
// rejected without touching any state.
class Worker {
 public:
  Worker(ArtifactStore& store, WorkerOptions options);
  ~Worker();

  Worker(const Worker&) = delete;
  Worker& operator=(const Worker&) = delete;

  // Synchronous execution on the calling thread. Throws Error(kBusy) when no
  // slot is free and Error(kInvalidArgument) for a kind/handler mismatch.
  // Job failures come back as a failed JobResult, not as exceptions.
  JobResult HandleTrain(const JobSpec& spec);
  JobResult HandleTest(const JobSpec& spec);

  UtilizationReport HandleIsFree() const;

  enum class Admission { kAccepted, kBusy };

  // Runs the job on a background thread. Resubmitting a known job id is a
  // no-op that reports kAccepted. Throws Error(kInvalidArgument) when the
  // spec is malformed.
  Admission Submit(const JobSpec& spec);

  std::optional<WorkerJobView> Job(const std::string& job_id) const;
  std::optional<std::string> Logs(const std::string& job_id) const;

  // Blocks until the job is terminal. nullopt for unknown ids.
  std::optional<JobResult> Wait(const std::string& job_id);

  // Invoked on the executing thread after each job turns terminal.
  void SetCompletionCallback(std::function<void(const JobResult&)> callback);

  const WorkerOptions& options() const { return options_; }

 private:
  struct Entry {
    WorkerJobView view;
    std::deque<std::string> log;
  };

  void Admit(const JobSpec& spec);  // caller holds mu_
  JobResult Run(const JobSpec& spec);
  void Finish(const JobResult& result);
  void AppendLog(const std::string& job_id, std::string line);
  void ReapThreads();  // caller holds mu_

  JobResult RunTrain(const JobSpec& spec, JobResult result);
  JobResult RunTest(const JobSpec& spec, JobResult result);

  ArtifactStore& store_;
  WorkerOptions options_;
  std::chrono::steady_clock::time_point started_;

  mutable std::mutex mu_;
  std::condition_variable done_cv_;
  int used_slots_ = 0;
  std::vector<std::string> running_;  // admission order
  std::map<std::string, Entry> jobs_;
  std::function<void(const JobResult&)> on_complete_;

  struct Runner {
    std::shared_ptr<std::atomic<bool>> finished;
    std::jthread thread;
  };
  std::vector<Runner> runners_;
};

// Index of the median element of `scores` (lower median for even sizes);
// ties keep the earlier index.
std::size_t MedianIndex(const std::vector<double>& scores);

}  // namespace nluforge

#endif  // NLUFORGE_WORKER_H_
