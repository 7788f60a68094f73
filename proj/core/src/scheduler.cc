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

#include "nluforge/scheduler.h"

#include <algorithm>
#include <cstdio>
#include <utility>

#include "nluforge/error.h"

namespace nluforge {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string PaddedId(const char* prefix, std::uint64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%06llu", prefix, static_cast<unsigned long long>(n));
  return buf;
}

template <typename T>
ordered_json Opt(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::string_view InstanceStateName(InstanceState state) {
  switch (state) {
    case InstanceState::kStarting: return "starting";
    case InstanceState::kReady: return "ready";
    case InstanceState::kDraining: return "draining";
    case InstanceState::kStopped: return "stopped";
  }
  return "stopped";
}

std::string_view JobStateName(JobState state) {
  switch (state) {
    case JobState::kQueued: return "queued";
    case JobState::kAssigned: return "assigned";
    case JobState::kRunning: return "running";
    case JobState::kSucceeded: return "succeeded";
    case JobState::kFailed: return "failed";
    case JobState::kCancelled: return "cancelled";
  }
  return "queued";
}

bool IsTerminal(JobState state) {
  return state == JobState::kSucceeded || state == JobState::kFailed ||
         state == JobState::kCancelled;
}

std::string_view ScaleActionName(ScaleAction::Kind kind) {
  switch (kind) {
    case ScaleAction::Kind::kSpawn: return "spawn";
    case ScaleAction::Kind::kSpawnFailed: return "spawn_failed";
    case ScaleAction::Kind::kStop: return "stop";
  }
  return "spawn";
}

void ValidatePoolPolicy(const PoolPolicy& p) {
  if (p.min_ready < 0 || p.max_instances < 0 || p.min_ready > p.max_instances) {
    throw Error(ErrorCode::kInvalidArgument, "pool policy needs 0 <= min_ready <= max_instances");
  }
  if (p.scale_up_queue_threshold < 1) {
    throw Error(ErrorCode::kInvalidArgument, "scale_up_queue_threshold must be positive");
  }
  if (p.idle_shutdown_s < 0) {
    throw Error(ErrorCode::kInvalidArgument, "idle_shutdown_s must be non-negative");
  }
}

Scheduler::Scheduler(std::shared_ptr<InstanceProvider> provider, SchedulerOptions options)
    : provider_(std::move(provider)), options_(std::move(options)),
      next_job_(std::max<std::uint64_t>(options_.first_job_number, 1)) {
  ValidatePoolPolicy(options_.pool);
  if (options_.retry_cap < 1) throw Error(ErrorCode::kInvalidArgument, "retry_cap must be positive");
  if (!provider_) throw Error(ErrorCode::kInvalidArgument, "scheduler needs a provider");
}

Scheduler::~Scheduler() {
  std::lock_guard lock(mu_);
  for (auto& [id, instance] : instances_) {
    if (instance.handle && instance.record.state != InstanceState::kStopped) {
      try {
        instance.handle->Shutdown();
      } catch (...) {
      }
    }
  }
}

Scheduler::Instance* Scheduler::FindInstance(const std::string& id) {
  auto it = instances_.find(id);
  return it == instances_.end() ? nullptr : &it->second;
}

JobRecord* Scheduler::FindJob(const std::string& id) {
  auto it = jobs_.find(id);
  return it == jobs_.end() ? nullptr : &it->second;
}

std::string Scheduler::SubmitJob(SubmitRequest request, double now) {
  std::lock_guard lock(mu_);
  if (request.idempotency_key) {
    if (auto it = idempotency_.find(*request.idempotency_key); it != idempotency_.end()) {
      return it->second;
    }
  }
  ValidateJobSpec(request.spec);
  if (request.target_instance) {
    Instance* target = FindInstance(*request.target_instance);
    if (!target) {
      throw Error(ErrorCode::kNotFound, "unknown instance '" + *request.target_instance + "'");
    }
    if (target->record.state == InstanceState::kStopped ||
        target->record.state == InstanceState::kDraining) {
      throw Error(ErrorCode::kFailedPrecondition,
                  "instance '" + *request.target_instance + "' is " +
                      std::string(InstanceStateName(target->record.state)));
    }
  }
  const std::uint64_t seq = next_job_++;
  JobRecord job;
  job.spec = std::move(request.spec);
  job.spec.job_id = PaddedId("job-", seq);
  job.submitted_at = now;
  job.target_instance = std::move(request.target_instance);
  job.owner = std::move(request.owner);
  job.idempotency_key = request.idempotency_key;
  job.sequence = seq;
  const std::string id = job.spec.job_id;
  JobRecord& stored = jobs_.emplace(id, std::move(job)).first->second;
  SetState(stored, JobState::kQueued);
  order_.push_back(id);
  if (request.idempotency_key) idempotency_[*request.idempotency_key] = id;
  return id;
}

void Scheduler::CancelJob(const std::string& job_id, double now) {
  std::lock_guard lock(mu_);
  JobRecord* job = FindJob(job_id);
  if (!job) throw Error(ErrorCode::kNotFound, "unknown job '" + job_id + "'");
  if (job->state == JobState::kCancelled) return;
  if (job->state != JobState::kQueued) {
    throw Error(ErrorCode::kConflict, "job '" + job_id + "' is " +
                                          std::string(JobStateName(job->state)) +
                                          "; only queued jobs can be cancelled");
  }
  FinishJob(*job, JobState::kCancelled, now, std::nullopt, std::nullopt);
}

bool Scheduler::Compatible(const JobRecord& job, const InstanceRecord& instance) const {
  if (job.target_instance && *job.target_instance != instance.instance_id) return false;
  if (instance.reserved_by && job.owner != instance.reserved_by) return false;
  return true;
}

void Scheduler::DetachJob(JobRecord& job) {
  if (!job.assigned_instance) return;
  if (Instance* inst = FindInstance(*job.assigned_instance)) {
    std::erase(inst->record.jobs, job.spec.job_id);
  }
  job.assigned_instance.reset();
}

void Scheduler::RefreshIdle(Instance& instance, double now) {
  InstanceRecord& r = instance.record;
  if (r.state == InstanceState::kReady && r.jobs.empty()) {
    if (!r.idle_since) r.idle_since = now;
  } else {
    r.idle_since.reset();
  }
}

void Scheduler::FinishJob(JobRecord& job, JobState state, double now,
                          std::optional<std::string> error, std::optional<JobResult> result) {
  const std::optional<std::string> instance_id = job.assigned_instance;
  DetachJob(job);
  SetState(job, state);
  job.finished_at = now;
  job.error = std::move(error);
  job.result = std::move(result);
  if (instance_id) {
    if (Instance* inst = FindInstance(*instance_id)) {
      RefreshIdle(*inst, now);
      if (inst->record.state == InstanceState::kDraining && inst->record.jobs.empty()) {
        StopNow(*inst, now);
      }
    }
  }
}

void Scheduler::SetState(JobRecord& job, JobState state) {
  if (state == JobState::kQueued) {
    queued_.emplace(job.sequence, job.spec.job_id);
  } else {
    queued_.erase(job.sequence);
  }
  job.state = state;
}

JobState Scheduler::RequeueOrFail(JobRecord& job, double now, const std::string& reason) {
  DetachJob(job);
  if (job.attempts >= options_.retry_cap) {
    FinishJob(job, JobState::kFailed, now,
              "retry_cap_exceeded: " + reason + " after " + std::to_string(job.attempts) +
                  " attempts",
              std::nullopt);
    return JobState::kFailed;
  }
  SetState(job, JobState::kQueued);
  job.started_at.reset();
  return JobState::kQueued;
}

void Scheduler::FailTargetedJobs(const std::string& instance_id, double now) {
  std::vector<std::string> queued;
  for (const auto& [seq, id] : queued_) queued.push_back(id);
  for (const auto& id : queued) {
    JobRecord& job = jobs_.at(id);
    if (job.state == JobState::kQueued && job.target_instance == instance_id) {
      FinishJob(job, JobState::kFailed, now,
                "targeted_instance_lost: instance '" + instance_id + "' is no longer available",
                std::nullopt);
    }
  }
}

void Scheduler::StopNow(Instance& instance, double now) {
  InstanceRecord& r = instance.record;
  if (r.state == InstanceState::kStopped) return;
  r.state = InstanceState::kStopped;
  r.idle_since.reset();
  const std::vector<std::string> orphans = r.jobs;
  for (const auto& id : orphans) {
    if (JobRecord* job = FindJob(id)) RequeueOrFail(*job, now, "instance stopped");
  }
  r.jobs.clear();
  if (instance.handle) {
    try {
      instance.handle->Shutdown();
    } catch (...) {
    }
  }
  FailTargetedJobs(r.instance_id, now);
}

std::vector<Assignment> Scheduler::AssignmentTick(double now) {
  std::lock_guard lock(mu_);
  std::vector<Assignment> out;
  std::map<std::string, int> free;
  for (auto& [id, inst] : instances_) {
    if (inst.record.state != InstanceState::kReady) continue;
    free[id] = inst.record.capacity_slots - static_cast<int>(inst.record.jobs.size());
  }
  // Snapshot: dispatch outcomes move jobs in and out of the queue.
  std::vector<std::string> queued;
  for (const auto& [seq, id] : queued_) queued.push_back(id);
  for (const auto& job_id : queued) {
    JobRecord& job = jobs_.at(job_id);
    if (job.state != JobState::kQueued) continue;
    std::string best;
    int best_free = 0;
    for (const auto& [iid, slots] : free) {
      if (slots <= 0 || !Compatible(job, instances_.at(iid).record)) continue;
      if (slots > best_free) {
        best = iid;
        best_free = slots;
      }
    }
    if (best.empty()) continue;

    Instance& inst = instances_.at(best);
    SetState(job, JobState::kAssigned);
    job.assigned_instance = best;
    ++job.attempts;
    inst.record.jobs.push_back(job_id);
    inst.record.idle_since.reset();
    --free[best];

    WorkerHandle::Dispatch outcome = WorkerHandle::Dispatch::kUnreachable;
    try {
      outcome = inst.handle->Submit(job.spec);
    } catch (...) {
      outcome = WorkerHandle::Dispatch::kUnreachable;
    }
    switch (outcome) {
      case WorkerHandle::Dispatch::kAccepted:
        SetState(job, JobState::kRunning);
        job.started_at = now;
        out.push_back(Assignment{job_id, best});
        break;
      case WorkerHandle::Dispatch::kBusy:
        // The worker never took the job, so the attempt is not spent.
        DetachJob(job);
        SetState(job, JobState::kQueued);
        --job.attempts;
        free[best] = 0;
        try {
          inst.record.utilization = inst.handle->Poll();
        } catch (...) {
        }
        RefreshIdle(inst, now);
        break;
      case WorkerHandle::Dispatch::kRejected:
        FinishJob(job, JobState::kFailed, now, "rejected: worker refused the job spec",
                  std::nullopt);
        break;
      case WorkerHandle::Dispatch::kUnreachable:
        free[best] = 0;
        RequeueOrFail(job, now, "instance unreachable");
        RefreshIdle(inst, now);
        break;
    }
  }
  return out;
}

std::string Scheduler::Spawn(const InstanceConfig& config, double now) {
  if (config.capacity_slots < 1) {
    throw Error(ErrorCode::kInvalidArgument, "capacity_slots must be positive");
  }
  const std::string id = PaddedId("i-", next_instance_++);
  std::unique_ptr<WorkerHandle> handle = provider_->Start(id, config);
  Instance inst;
  inst.record.instance_id = id;
  inst.record.endpoint = handle->endpoint();
  inst.record.capacity_slots = config.capacity_slots;
  inst.record.state = InstanceState::kStarting;
  inst.record.created_at = now;
  inst.record.last_heartbeat = now;
  inst.record.reserved_by = config.reserved_by;
  inst.record.pinned = config.pinned;
  inst.record.hardware = config.hardware;
  inst.handle = std::move(handle);
  std::optional<UtilizationReport> util;
  try {
    util = inst.handle->Poll();
  } catch (...) {
  }
  if (util) {
    inst.record.state = InstanceState::kReady;
    inst.record.utilization = util;
    inst.record.idle_since = now;
  }
  instances_.emplace(id, std::move(inst));
  return id;
}

InstanceRecord Scheduler::CreateInstance(const InstanceConfig& config, double now) {
  std::lock_guard lock(mu_);
  return instances_.at(Spawn(config, now)).record;
}

InstanceRecord Scheduler::StopInstance(const std::string& instance_id, double now) {
  std::lock_guard lock(mu_);
  Instance* inst = FindInstance(instance_id);
  if (!inst) throw Error(ErrorCode::kNotFound, "unknown instance '" + instance_id + "'");
  if (inst->record.state == InstanceState::kStopped) return inst->record;
  if (inst->record.jobs.empty()) {
    StopNow(*inst, now);
  } else {
    inst->record.state = InstanceState::kDraining;
    inst->record.idle_since.reset();
    FailTargetedJobs(instance_id, now);
  }
  return inst->record;
}

std::vector<ScaleAction> Scheduler::AutoscaleTick(double now) {
  std::lock_guard lock(mu_);
  std::vector<ScaleAction> actions;
  const PoolPolicy& pool = options_.pool;
  int live = 0, ready = 0, starting = 0, free_slots = 0;
  for (const auto& [id, inst] : instances_) {
    const auto& r = inst.record;
    if (r.state == InstanceState::kStopped) continue;
    ++live;
    if (r.state == InstanceState::kStarting) ++starting;
    if (r.state == InstanceState::kReady) {
      ++ready;
      if (!r.reserved_by) free_slots += r.capacity_slots - static_cast<int>(r.jobs.size());
    }
  }
  int waiting = 0;
  for (const auto& [seq, id] : queued_) {
    if (!jobs_.at(id).target_instance) ++waiting;
  }
  const int unassignable = std::max(0, waiting - free_slots);
  const int floor = std::min(pool.min_ready, pool.max_instances);
  const bool below_floor = ready + starting < floor;
  const bool backlog = unassignable >= pool.scale_up_queue_threshold;
  if ((below_floor || backlog) && live < pool.max_instances) {
    try {
      const std::string id = Spawn(options_.default_instance, now);
      actions.push_back(ScaleAction{ScaleAction::Kind::kSpawn, id,
                                    below_floor ? "floor" : "backlog"});
      if (instances_.at(id).record.state == InstanceState::kReady) ++ready;
    } catch (const std::exception& e) {
      actions.push_back(ScaleAction{ScaleAction::Kind::kSpawnFailed, "", e.what()});
    }
  }

  // Scale down newest idle instances first.
  for (auto it = instances_.rbegin(); it != instances_.rend(); ++it) {
    if (ready <= pool.min_ready) break;
    InstanceRecord& r = it->second.record;
    if (r.state != InstanceState::kReady || r.pinned || r.reserved_by || !r.jobs.empty()) continue;
    if (!r.idle_since || now - *r.idle_since <= pool.idle_shutdown_s) continue;
    StopNow(it->second, now);
    --ready;
    actions.push_back(ScaleAction{ScaleAction::Kind::kStop, r.instance_id, "idle"});
  }
  return actions;
}

void Scheduler::MonitorTick(double now) {
  std::lock_guard lock(mu_);
  for (auto& [iid, inst] : instances_) {
    InstanceRecord& r = inst.record;
    if (r.state == InstanceState::kStopped) continue;
    std::optional<UtilizationReport> util;
    try {
      util = inst.handle->Poll();
    } catch (...) {
    }
    if (!util) continue;
    r.last_heartbeat = now;
    r.utilization = util;
    if (r.state == InstanceState::kStarting) r.state = InstanceState::kReady;
    const std::vector<std::string> mine = r.jobs;
    for (const auto& job_id : mine) {
      JobRecord* job = FindJob(job_id);
      if (!job || job->state != JobState::kRunning) continue;
      std::optional<WorkerJobView> view;
      try {
        view = inst.handle->FetchJob(job_id);
      } catch (...) {
        continue;
      }
      if (!view) {
        RequeueOrFail(*job, now, "job unknown to its instance");
        continue;
      }
      if (view->result) CompleteJob(*view->result, now);
    }
    if (r.state == InstanceState::kDraining && r.jobs.empty()) {
      StopNow(inst, now);
    } else {
      RefreshIdle(inst, now);
    }
  }
}

std::vector<AffectedJob> Scheduler::HeartbeatSweep(double now, double timeout_s) {
  std::lock_guard lock(mu_);
  std::vector<std::string> touched;
  for (auto& [iid, inst] : instances_) {
    InstanceRecord& r = inst.record;
    if (r.state == InstanceState::kStopped || now - r.last_heartbeat <= timeout_s) continue;
    touched.insert(touched.end(), r.jobs.begin(), r.jobs.end());
    for (const auto& [seq, id] : queued_) {
      if (jobs_.at(id).target_instance == iid) touched.push_back(id);
    }
    StopNow(inst, now);
  }
  std::vector<AffectedJob> out;
  for (const auto& id : touched) out.push_back(AffectedJob{id, jobs_.at(id).state});
  return out;
}

void Scheduler::Heartbeat(const std::string& instance_id, double now) {
  std::lock_guard lock(mu_);
  Instance* inst = FindInstance(instance_id);
  if (!inst) throw Error(ErrorCode::kNotFound, "unknown instance '" + instance_id + "'");
  if (inst->record.state == InstanceState::kStopped) return;
  inst->record.last_heartbeat = now;
  if (inst->record.state == InstanceState::kStarting) {
    inst->record.state = InstanceState::kReady;
    RefreshIdle(*inst, now);
  }
}

void Scheduler::CompleteJob(const JobResult& result, double now) {
  std::lock_guard lock(mu_);
  JobRecord* job = FindJob(result.job_id);
  if (!job || (job->state != JobState::kRunning && job->state != JobState::kAssigned)) return;
  const bool ok = result.status == JobStatus::kSucceeded;
  FinishJob(*job, ok ? JobState::kSucceeded : JobState::kFailed, now,
            ok ? std::nullopt : result.error, result);
}

void Scheduler::RunOnce(double now) {
  std::lock_guard lock(mu_);
  MonitorTick(now);
  HeartbeatSweep(now, options_.heartbeat_timeout_s);
  AssignmentTick(now);
  AutoscaleTick(now);
}

std::vector<InstanceRecord> Scheduler::ListInstances(bool include_stopped) const {
  std::lock_guard lock(mu_);
  std::vector<InstanceRecord> out;
  for (const auto& [id, inst] : instances_) {
    if (include_stopped || inst.record.state != InstanceState::kStopped) out.push_back(inst.record);
  }
  return out;
}

std::optional<InstanceRecord> Scheduler::GetInstance(const std::string& instance_id) const {
  std::lock_guard lock(mu_);
  auto it = instances_.find(instance_id);
  if (it == instances_.end()) return std::nullopt;
  return it->second.record;
}

std::vector<JobRecord> Scheduler::ListJobs(bool include_terminal) const {
  std::lock_guard lock(mu_);
  std::vector<JobRecord> out;
  if (include_terminal) {
    for (const auto& id : order_) out.push_back(jobs_.at(id));
    return out;
  }
  for (const auto& [id, job] : jobs_) {
    if (!IsTerminal(job.state)) out.push_back(job);
  }
  std::sort(out.begin(), out.end(),
            [](const JobRecord& a, const JobRecord& b) { return a.sequence < b.sequence; });
  return out;
}

std::optional<JobRecord> Scheduler::GetJob(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

ordered_json InstanceToJson(const InstanceRecord& r) {
  ordered_json out;
  out["instance_id"] = r.instance_id;
  out["endpoint"] = r.endpoint;
  out["state"] = InstanceStateName(r.state);
  out["capacity_slots"] = r.capacity_slots;
  out["free_slots"] = r.state == InstanceState::kReady
                          ? r.capacity_slots - static_cast<int>(r.jobs.size())
                          : 0;
  out["jobs"] = r.jobs;
  out["reserved_by"] = Opt(r.reserved_by);
  out["pinned"] = r.pinned;
  ordered_json hw;
  hw["cpu_cores"] = r.hardware.cpu_cores;
  hw["memory_gb"] = r.hardware.memory_gb;
  hw["gpu_count"] = r.hardware.gpu_count;
  hw["gpu_model"] = r.hardware.gpu_model;
  out["hardware"] = std::move(hw);
  out["created_at"] = r.created_at;
  out["last_heartbeat"] = r.last_heartbeat;
  out["idle_since"] = Opt(r.idle_since);
  out["utilization"] = r.utilization ? UtilizationToJson(*r.utilization) : ordered_json(nullptr);
  return out;
}

ordered_json JobRecordToJson(const JobRecord& r) {
  ordered_json out;
  out["job_id"] = r.spec.job_id;
  out["kind"] = JobKindName(r.spec.kind);
  out["state"] = JobStateName(r.state);
  out["assigned_instance"] = Opt(r.assigned_instance);
  out["target_instance"] = Opt(r.target_instance);
  out["owner"] = Opt(r.owner);
  out["attempts"] = r.attempts;
  out["submitted_at"] = r.submitted_at;
  out["started_at"] = Opt(r.started_at);
  out["finished_at"] = Opt(r.finished_at);
  out["error"] = Opt(r.error);
  out["spec"] = JobSpecToJson(r.spec);
  out["result"] = r.result ? JobResultToJson(*r.result) : ordered_json(nullptr);
  return out;
}

ordered_json ScaleActionToJson(const ScaleAction& a) {
  ordered_json out;
  out["action"] = ScaleActionName(a.kind);
  out["instance_id"] = a.instance_id;
  out["detail"] = a.detail;
  return out;
}

HardwareDescriptor HardwareFromJson(const json& in) {
  HardwareDescriptor hw;
  if (!in.is_object()) return hw;
  hw.cpu_cores = in.value("cpu_cores", hw.cpu_cores);
  hw.memory_gb = in.value("memory_gb", hw.memory_gb);
  hw.gpu_count = in.value("gpu_count", hw.gpu_count);
  hw.gpu_model = in.value("gpu_model", hw.gpu_model);
  return hw;
}

InstanceConfig InstanceConfigFromJson(const json& in) {
  InstanceConfig config;
  if (in.is_null()) return config;
  if (!in.is_object()) throw Error(ErrorCode::kInvalidArgument, "instance config must be an object");
  try {
    config.capacity_slots = in.value("capacity_slots", config.capacity_slots);
    if (auto it = in.find("hardware"); it != in.end()) config.hardware = HardwareFromJson(*it);
    if (auto it = in.find("reserved_by"); it != in.end() && !it->is_null()) {
      config.reserved_by = it->get<std::string>();
    }
    config.pinned = in.value("pinned", false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("instance config: ") + e.what());
  }
  if (config.capacity_slots < 1) {
    throw Error(ErrorCode::kInvalidArgument, "capacity_slots must be positive");
  }
  return config;
}

PoolPolicy PoolPolicyFromJson(const json& in, PoolPolicy base) {
  if (!in.is_object()) return base;
  try {
    base.min_ready = in.value("min_ready", base.min_ready);
    base.max_instances = in.value("max_instances", base.max_instances);
    base.scale_up_queue_threshold =
        in.value("scale_up_queue_threshold", base.scale_up_queue_threshold);
    base.idle_shutdown_s = in.value("idle_shutdown_s", base.idle_shutdown_s);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("pool policy: ") + e.what());
  }
  ValidatePoolPolicy(base);
  return base;
}

}  // namespace nluforge
