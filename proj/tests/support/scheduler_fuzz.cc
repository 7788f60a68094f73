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

#include "scheduler_fuzz.h"

#include <algorithm>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "nluforge/error.h"
#include "nluforge/scheduler.h"
#include "nluforge/sim_provider.h"

namespace nluforge::testing {
namespace {

class Fuzzer {
 public:
  explicit Fuzzer(const SchedulerFuzzOptions& options)
      : options_(options), rng_(options.seed) {
    SyntheticOptions so;
    so.busy_probability = options.busy_probability;
    so.start_failure_probability = options.start_failure_probability;
    so.seed = options.seed * 7919 + 1;
    provider_ = std::make_shared<SyntheticProvider>(so);
    SchedulerOptions opts;
    opts.pool.min_ready = options.min_ready;
    opts.pool.max_instances = options.max_instances;
    opts.pool.scale_up_queue_threshold = 2;
    opts.pool.idle_shutdown_s = 5.0;
    opts.retry_cap = options.retry_cap;
    opts.heartbeat_timeout_s = 3.0;
    opts.default_instance.capacity_slots = 2;
    scheduler_ = std::make_unique<Scheduler>(provider_, opts);
  }

  SchedulerFuzzReport Run() {
    for (std::size_t i = 0; i < options_.events; ++i) {
      Step();
      ++report_.events;
      CheckCapacity();
      if (i % options_.complete_check_every == 0) {
        CheckJobs(true);
      } else if (i % options_.full_check_every == 0) {
        CheckJobs(false);
      }
      if (report_.violations.size() > 20) return report_;
    }
    CheckJobs(true);
    Quiesce();
    return report_;
  }

 private:
  void Violation(const std::string& what) {
    std::ostringstream os;
    os << "event " << report_.events << " t=" << now_ << ": " << what;
    report_.violations.push_back(os.str());
  }

  JobSpec Spec() {
    JobSpec s;
    s.kind = JobKind::kTrain;
    s.corpus = "fuzz";
    return s;
  }

  std::string PickLiveInstance() {
    const auto live = provider_->LiveInstances();
    if (live.empty()) return {};
    return live[rng_() % live.size()];
  }

  void Submit(std::optional<std::string> target) {
    SubmitRequest req;
    req.spec = Spec();
    req.target_instance = target;
    if (rng_() % 10 == 0) req.idempotency_key = "k" + std::to_string(rng_() % 50);
    try {
      const std::string id = scheduler_->SubmitJob(req, now_);
      if (req.idempotency_key) {
        auto [it, fresh] = idempotency_.emplace(*req.idempotency_key, id);
        if (!fresh && it->second != id) Violation("idempotency key mapped to two jobs");
        if (!fresh) return;
      }
      if (!submitted_.insert(id).second) Violation("duplicate job id " + id);
      if (target) targets_[id] = *target;
      ++report_.jobs_submitted;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kFailedPrecondition && e.code() != ErrorCode::kNotFound) {
        Violation(std::string("unexpected submit error: ") + e.what());
      }
    }
  }

  void Step() {
    const unsigned roll = rng_() % 100;
    if (roll < 22) {
      Submit(std::nullopt);
    } else if (roll < 25) {
      const std::string target = PickLiveInstance();
      if (!target.empty()) Submit(target);
    } else if (roll < 40) {
      now_ += std::uniform_real_distribution<double>(0.0, 1.5)(rng_);
    } else if (roll < 55) {
      scheduler_->RunOnce(now_);
    } else if (roll < 60) {
      scheduler_->AssignmentTick(now_);
    } else if (roll < 63) {
      scheduler_->AutoscaleTick(now_);
    } else if (roll < 66) {
      scheduler_->MonitorTick(now_);
    } else if (roll < 68) {
      scheduler_->HeartbeatSweep(now_, scheduler_->options().heartbeat_timeout_s);
    } else if (roll < 88) {
      FinishSomething(rng_() % 5 != 0);
    } else if (roll < 90) {
      const std::string victim = PickLiveInstance();
      if (!victim.empty()) {
        provider_->Kill(victim);
        ++report_.kills;
      }
    } else if (roll < 93) {
      if (!submitted_.empty()) {
        auto it = submitted_.begin();
        std::advance(it, rng_() % submitted_.size());
        try {
          scheduler_->CancelJob(*it, now_);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kConflict) Violation(std::string("cancel: ") + e.what());
        }
      }
    } else if (roll < 95) {
      InstanceConfig config;
      config.capacity_slots = 1 + static_cast<int>(rng_() % 3);
      config.pinned = rng_() % 4 == 0;
      try {
        scheduler_->CreateInstance(config, now_);
      } catch (const Error&) {
        // Injected start failure.
      }
    } else if (roll < 96) {
      const auto instances = scheduler_->ListInstances();
      if (!instances.empty()) {
        scheduler_->StopInstance(instances[rng_() % instances.size()].instance_id, now_);
      }
    } else {
      for (const auto& inst : scheduler_->ListInstances()) {
        if (inst.state != InstanceState::kStopped) scheduler_->Heartbeat(inst.instance_id, now_);
      }
    }
  }

  void FinishSomething(bool success) {
    const std::string id = PickLiveInstance();
    if (id.empty()) return;
    const auto running = provider_->RunningJobs(id);
    if (running.empty()) return;
    provider_->FinishJob(id, running[rng_() % running.size()], success);
  }

  // Stopped instances are covered by the complete job check.
  void CheckCapacity(bool include_stopped = false) {
    for (const auto& inst : scheduler_->ListInstances(include_stopped)) {
      if (static_cast<int>(inst.jobs.size()) > inst.capacity_slots) {
        Violation("scheduler over capacity on " + inst.instance_id);
      }
      if (static_cast<int>(provider_->RunningJobs(inst.instance_id).size()) > inst.capacity_slots) {
        Violation("worker over capacity on " + inst.instance_id);
      }
      if (!inst.jobs.empty() && inst.state != InstanceState::kReady &&
          inst.state != InstanceState::kDraining) {
        Violation("jobs held by " + std::string(InstanceStateName(inst.state)) + " instance " +
                  inst.instance_id);
      }
    }
  }

  // A partial check looks at live jobs and instances only; a terminal job that
  // came back to life still shows up there.
  void CheckJobs(bool complete) {
    if (complete) CheckCapacity(true);
    const auto jobs = scheduler_->ListJobs(complete);
    std::set<std::string> seen;
    std::map<std::string, std::string> holder;
    for (const auto& inst : scheduler_->ListInstances(complete)) {
      for (const auto& j : inst.jobs) {
        if (!holder.emplace(j, inst.instance_id).second) Violation("job " + j + " on two instances");
      }
    }
    for (const auto& job : jobs) {
      const std::string& id = job.spec.job_id;
      seen.insert(id);
      if (!submitted_.count(id)) Violation("unknown job " + id);
      auto prev = terminal_.find(id);
      if (prev != terminal_.end() && prev->second != job.state) {
        Violation("terminal job " + id + " changed state");
      }
      if (IsTerminal(job.state)) terminal_[id] = job.state;
      if (job.attempts > options_.retry_cap) Violation("attempts over cap for " + id);
      report_.max_attempts = std::max<std::size_t>(report_.max_attempts, job.attempts);
      const bool placed = job.state == JobState::kAssigned || job.state == JobState::kRunning;
      if (placed != job.assigned_instance.has_value()) Violation("placement mismatch for " + id);
      if (placed) {
        auto h = holder.find(id);
        if (h == holder.end() || h->second != *job.assigned_instance) {
          Violation("instance does not hold placed job " + id);
        }
        if (auto t = targets_.find(id); t != targets_.end() && t->second != *job.assigned_instance) {
          Violation("targeted job " + id + " placed elsewhere");
        }
      } else if (holder.count(id)) {
        Violation("unplaced job " + id + " still held");
      }
    }
    if (complete && seen != submitted_) Violation("job set differs from submissions");
  }

  void Quiesce() {
    for (std::size_t round = 0; round < options_.drain_rounds; ++round) {
      now_ += 1.0;
      for (const auto& id : provider_->LiveInstances()) {
        for (const auto& job : provider_->RunningJobs(id)) provider_->FinishJob(id, job, true);
      }
      scheduler_->RunOnce(now_);
      CheckCapacity();
      if (round % 25 != 0) continue;
      const auto jobs = scheduler_->ListJobs();
      const bool done = std::all_of(jobs.begin(), jobs.end(),
                                    [](const JobRecord& j) { return IsTerminal(j.state); });
      int ready = 0;
      for (const auto& inst : scheduler_->ListInstances()) ready += inst.state == InstanceState::kReady;
      if (done && ready >= std::min(options_.min_ready, options_.max_instances)) {
        CheckJobs(true);
        Tally(jobs);
        return;
      }
    }
    for (const auto& job : scheduler_->ListJobs()) {
      if (!IsTerminal(job.state)) {
        Violation("job " + job.spec.job_id + " not terminal after quiescence: " +
                  std::string(JobStateName(job.state)));
        break;
      }
    }
    Violation("ready floor or termination not reached during quiescence");
  }

  void Tally(const std::vector<JobRecord>& jobs) {
    report_.busy_rejections_seen = provider_->BusyRejections();
    for (const auto& job : jobs) {
      switch (job.state) {
        case JobState::kSucceeded: ++report_.jobs_succeeded; break;
        case JobState::kFailed: ++report_.jobs_failed; break;
        case JobState::kCancelled: ++report_.jobs_cancelled; break;
        default: break;
      }
      if (job.state == JobState::kFailed && job.error &&
          job.error->rfind("retry_cap_exceeded", 0) == 0 && job.attempts != options_.retry_cap) {
        Violation("job " + job.spec.job_id + " failed at the cap with attempts " +
                  std::to_string(job.attempts));
      }
    }
  }

  SchedulerFuzzOptions options_;
  std::mt19937_64 rng_;
  std::shared_ptr<SyntheticProvider> provider_;
  std::unique_ptr<Scheduler> scheduler_;
  double now_ = 0.0;
  std::set<std::string> submitted_;
  std::map<std::string, std::string> targets_;
  std::map<std::string, std::string> idempotency_;
  std::map<std::string, JobState> terminal_;
  SchedulerFuzzReport report_;
};

}  // namespace

SchedulerFuzzReport RunSchedulerFuzz(const SchedulerFuzzOptions& options) {
  return Fuzzer(options).Run();
}

}  // namespace nluforge::testing
