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

#ifndef NLUFORGE_SCHEDULER_H_
#define NLUFORGE_SCHEDULER_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nluforge/job.h"
#include "nluforge/worker.h"

namespace nluforge {

// Carried as metadata; nothing is enforced against it.
struct HardwareDescriptor {
  int cpu_cores = 4;
  int memory_gb = 8;
  int gpu_count = 1;
  std::string gpu_model = "NVIDIA V100";
};

struct InstanceConfig {
  int capacity_slots = 1;
  HardwareDescriptor hardware;
  std::optional<std::string> reserved_by;
  bool pinned = false;
};

enum class InstanceState { kStarting, kReady, kDraining, kStopped };

std::string_view InstanceStateName(InstanceState state);

struct InstanceRecord {
  std::string instance_id;
  std::string endpoint;
  int capacity_slots = 1;
  InstanceState state = InstanceState::kStarting;
  double created_at = 0.0;
  double last_heartbeat = 0.0;
  std::optional<double> idle_since;  // set while ready with no jobs
  std::optional<std::string> reserved_by;
  bool pinned = false;
  HardwareDescriptor hardware;
  std::vector<std::string> jobs;  // assigned or running, scheduler view
  std::optional<UtilizationReport> utilization;  // last snapshot
};

enum class JobState { kQueued, kAssigned, kRunning, kSucceeded, kFailed, kCancelled };

std::string_view JobStateName(JobState state);
bool IsTerminal(JobState state);

struct JobRecord {
  JobSpec spec;
  JobState state = JobState::kQueued;
  std::optional<std::string> assigned_instance;
  double submitted_at = 0.0;
  std::optional<double> started_at;
  std::optional<double> finished_at;
  std::optional<std::string> target_instance;
  std::optional<std::string> owner;  // matched against reserved_by
  std::optional<std::string> idempotency_key;
  int attempts = 0;
  std::uint64_t sequence = 0;  // FIFO position
  std::optional<JobResult> result;
  std::optional<std::string> error;
};

struct PoolPolicy {
  int min_ready = 1;
  int max_instances = 4;
  int scale_up_queue_threshold = 1;
  double idle_shutdown_s = 300.0;
};

// Throws Error(kInvalidArgument) unless 0 <= min_ready <= max_instances etc.
void ValidatePoolPolicy(const PoolPolicy& policy);

struct SchedulerOptions {
  PoolPolicy pool;
  int retry_cap = 3;
  double heartbeat_timeout_s = 30.0;
  InstanceConfig default_instance;  // used by autoscaling
  std::uint64_t first_job_number = 1;  // ids continue after a restart
};

// Worker as seen from the scheduler, whatever transport backs it.
class WorkerHandle {
 public:
  enum class Dispatch { kAccepted, kBusy, kRejected, kUnreachable };

  virtual ~WorkerHandle() = default;
  virtual std::string endpoint() const = 0;
  virtual Dispatch Submit(const JobSpec& spec) = 0;
  // nullopt when the worker does not answer.
  virtual std::optional<UtilizationReport> Poll() = 0;
  virtual std::optional<WorkerJobView> FetchJob(const std::string& job_id) = 0;
  virtual void Shutdown() = 0;
};

class InstanceProvider {
 public:
  virtual ~InstanceProvider() = default;
  // Throws Error(kResourceExhausted) or Error(kUnavailable) on failure.
  virtual std::unique_ptr<WorkerHandle> Start(const std::string& instance_id,
                                              const InstanceConfig& config) = 0;
};

struct SubmitRequest {
  JobSpec spec;
  std::optional<std::string> target_instance;
  std::optional<std::string> owner;
  std::optional<std::string> idempotency_key;
};

struct Assignment {
  std::string job_id;
  std::string instance_id;
};

struct ScaleAction {
  enum class Kind { kSpawn, kSpawnFailed, kStop };
  Kind kind = Kind::kSpawn;
  std::string instance_id;
  std::string detail;
};

std::string_view ScaleActionName(ScaleAction::Kind kind);

struct AffectedJob {
  std::string job_id;
  JobState new_state = JobState::kQueued;
};

// Job queue plus instance registry. Every public method is one atomic step of
// a serialized state machine; time is supplied by the caller in seconds.
class Scheduler {
 public:
  Scheduler(std::shared_ptr<InstanceProvider> provider, SchedulerOptions options);
  ~Scheduler();

  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  // Throws Error(kInvalidArgument) for an invalid spec, Error(kNotFound) for
  // an unknown target and Error(kFailedPrecondition) for a stopped or
  // draining one. A repeated idempotency key returns the original job id.
  std::string SubmitJob(SubmitRequest request, double now);
  // Queued jobs only; anything else throws Error(kConflict).
  void CancelJob(const std::string& job_id, double now);

  std::vector<Assignment> AssignmentTick(double now);
  std::vector<ScaleAction> AutoscaleTick(double now);
  // Polls every live instance: refreshes heartbeats and utilization, promotes
  // starting instances, collects finished jobs and stops drained instances.
  void MonitorTick(double now);
  std::vector<AffectedJob> HeartbeatSweep(double now, double timeout_s);
  // Records a heartbeat pushed by an instance.
  void Heartbeat(const std::string& instance_id, double now);
  // Completion event for a running job. Unknown or non-running jobs are
  // ignored so duplicate deliveries are harmless.
  void CompleteJob(const JobResult& result, double now);

  // One full round: monitor, heartbeat sweep, assignment, autoscale.
  void RunOnce(double now);

  InstanceRecord CreateInstance(const InstanceConfig& config, double now);
  // Drains, then stops once the instance's jobs finish. Throws
  // Error(kNotFound).
  InstanceRecord StopInstance(const std::string& instance_id, double now);

  std::vector<InstanceRecord> ListInstances(bool include_stopped = true) const;
  std::optional<InstanceRecord> GetInstance(const std::string& instance_id) const;
  std::vector<JobRecord> ListJobs(bool include_terminal = true) const;  // submission order
  std::optional<JobRecord> GetJob(const std::string& job_id) const;

  const SchedulerOptions& options() const { return options_; }

 private:
  struct Instance {
    InstanceRecord record;
    std::unique_ptr<WorkerHandle> handle;
  };

  Instance* FindInstance(const std::string& id);
  JobRecord* FindJob(const std::string& id);
  std::string Spawn(const InstanceConfig& config, double now);  // may throw
  void DetachJob(JobRecord& job);
  void SetState(JobRecord& job, JobState state);  // keeps queued_ in sync
  void FinishJob(JobRecord& job, JobState state, double now,
                 std::optional<std::string> error, std::optional<JobResult> result);
  // Returns a lost job to the queue, or fails it at the retry cap.
  JobState RequeueOrFail(JobRecord& job, double now, const std::string& reason);
  void StopNow(Instance& instance, double now);
  void FailTargetedJobs(const std::string& instance_id, double now);
  void RefreshIdle(Instance& instance, double now);
  bool Compatible(const JobRecord& job, const InstanceRecord& instance) const;

  std::shared_ptr<InstanceProvider> provider_;
  SchedulerOptions options_;

  mutable std::recursive_mutex mu_;
  std::map<std::string, Instance> instances_;
  std::map<std::string, JobRecord> jobs_;
  std::vector<std::string> order_;  // job ids in submission order
  std::map<std::uint64_t, std::string> queued_;  // queued job ids by sequence
  std::map<std::string, std::string> idempotency_;
  std::uint64_t next_job_;
  std::uint64_t next_instance_ = 1;
};

nlohmann::ordered_json InstanceToJson(const InstanceRecord& record);
nlohmann::ordered_json JobRecordToJson(const JobRecord& record);
nlohmann::ordered_json ScaleActionToJson(const ScaleAction& action);
HardwareDescriptor HardwareFromJson(const nlohmann::json& object);
InstanceConfig InstanceConfigFromJson(const nlohmann::json& object);
PoolPolicy PoolPolicyFromJson(const nlohmann::json& object, PoolPolicy base = {});

}  // namespace nluforge

#endif  // NLUFORGE_SCHEDULER_H_
