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

#include "nluforge/sim_provider.h"

#include <algorithm>
#include <atomic>
#include <optional>
#include <utility>

#include "nluforge/error.h"

namespace nluforge {
namespace {

class InProcessHandle : public WorkerHandle {
 public:
  InProcessHandle(std::string id, std::unique_ptr<Worker> worker)
      : id_(std::move(id)), worker_(std::move(worker)) {}

  std::string endpoint() const override { return "inproc://" + id_; }

  Dispatch Submit(const JobSpec& spec) override {
    if (stopped_) return Dispatch::kUnreachable;
    try {
      return worker_->Submit(spec) == Worker::Admission::kAccepted ? Dispatch::kAccepted
                                                                   : Dispatch::kBusy;
    } catch (const Error&) {
      return Dispatch::kRejected;
    }
  }

  std::optional<UtilizationReport> Poll() override {
    if (stopped_) return std::nullopt;
    return worker_->HandleIsFree();
  }

  std::optional<WorkerJobView> FetchJob(const std::string& job_id) override {
    if (stopped_) return std::nullopt;
    return worker_->Job(job_id);
  }

  void Shutdown() override { stopped_ = true; }

 private:
  std::string id_;
  std::unique_ptr<Worker> worker_;
  std::atomic<bool> stopped_{false};
};

}  // namespace

InProcessProvider::InProcessProvider(ArtifactStore& store, unsigned grid_parallelism)
    : store_(store), grid_parallelism_(grid_parallelism) {}

std::unique_ptr<WorkerHandle> InProcessProvider::Start(const std::string& instance_id,
                                                       const InstanceConfig& config) {
  WorkerOptions options;
  options.instance_id = instance_id;
  options.capacity_slots = config.capacity_slots;
  options.grid_parallelism = grid_parallelism_;
  return std::make_unique<InProcessHandle>(instance_id,
                                           std::make_unique<Worker>(store_, options));
}

struct SyntheticProvider::State {
  std::string id;
  int capacity = 1;
  bool alive = true;
  std::vector<std::string> running;
  std::map<std::string, JobResult> finished;
  std::map<std::string, JobKind> kinds;
};

namespace {

class SyntheticHandle : public WorkerHandle {
 public:
  SyntheticHandle(std::shared_ptr<SyntheticProvider::State> state,
                  std::shared_ptr<std::mutex> mu, std::shared_ptr<std::mt19937_64> rng,
                  double busy_probability, std::shared_ptr<std::size_t> busy_rejections)
      : state_(std::move(state)), mu_(std::move(mu)), rng_(std::move(rng)),
        busy_probability_(busy_probability), busy_rejections_(std::move(busy_rejections)) {}

  std::string endpoint() const override { return "synthetic://" + state_->id; }

  Dispatch Submit(const JobSpec& spec) override {
    std::lock_guard lock(*mu_);
    if (!state_->alive) return Dispatch::kUnreachable;
    if (state_->kinds.count(spec.job_id)) {
      // Known job: an idempotent resubmission unless it already finished
      // and was handed out again by the scheduler.
      if (!state_->finished.count(spec.job_id)) return Dispatch::kAccepted;
      state_->finished.erase(spec.job_id);
    }
    if (static_cast<int>(state_->running.size()) >= state_->capacity ||
        (busy_probability_ > 0 &&
         std::uniform_real_distribution<double>(0.0, 1.0)(*rng_) < busy_probability_)) {
      ++*busy_rejections_;
      return Dispatch::kBusy;
    }
    state_->running.push_back(spec.job_id);
    state_->kinds[spec.job_id] = spec.kind;
    return Dispatch::kAccepted;
  }

  std::optional<UtilizationReport> Poll() override {
    std::lock_guard lock(*mu_);
    if (!state_->alive) return std::nullopt;
    UtilizationReport r;
    r.instance_id = state_->id;
    r.capacity_slots = state_->capacity;
    r.used_slots = static_cast<int>(state_->running.size());
    r.busy = r.used_slots > 0;
    r.running_jobs = state_->running;
    if (!state_->running.empty()) r.running_job = state_->running.front();
    r.queue_accepting = r.used_slots < r.capacity_slots;
    return r;
  }

  std::optional<WorkerJobView> FetchJob(const std::string& job_id) override {
    std::lock_guard lock(*mu_);
    if (!state_->alive) return std::nullopt;
    auto kind = state_->kinds.find(job_id);
    if (kind == state_->kinds.end()) return std::nullopt;
    WorkerJobView view;
    view.job_id = job_id;
    view.kind = kind->second;
    if (auto it = state_->finished.find(job_id); it != state_->finished.end()) {
      view.state = it->second.status == JobStatus::kSucceeded ? WorkerJobState::kSucceeded
                                                              : WorkerJobState::kFailed;
      view.result = it->second;
    }
    return view;
  }

  void Shutdown() override {
    std::lock_guard lock(*mu_);
    state_->alive = false;
  }

 private:
  std::shared_ptr<SyntheticProvider::State> state_;
  std::shared_ptr<std::mutex> mu_;
  std::shared_ptr<std::mt19937_64> rng_;
  double busy_probability_;
  std::shared_ptr<std::size_t> busy_rejections_;
};

}  // namespace

SyntheticProvider::SyntheticProvider(SyntheticOptions options)
    : options_(options),
      mu_(std::make_shared<std::mutex>()),
      rng_(std::make_shared<std::mt19937_64>(options.seed)),
      busy_rejections_(std::make_shared<std::size_t>(0)) {}

std::size_t SyntheticProvider::BusyRejections() const {
  std::lock_guard lock(*mu_);
  return *busy_rejections_;
}

std::unique_ptr<WorkerHandle> SyntheticProvider::Start(const std::string& instance_id,
                                                       const InstanceConfig& config) {
  std::lock_guard lock(*mu_);
  if (options_.start_failure_probability > 0 &&
      std::uniform_real_distribution<double>(0.0, 1.0)(*rng_) <
          options_.start_failure_probability) {
    throw Error(ErrorCode::kUnavailable, "injected start failure for " + instance_id);
  }
  auto state = std::make_shared<State>();
  state->id = instance_id;
  state->capacity = config.capacity_slots;
  instances_[instance_id] = state;
  return std::make_unique<SyntheticHandle>(state, mu_, rng_, options_.busy_probability,
                                           busy_rejections_);
}

void SyntheticProvider::Kill(const std::string& instance_id) {
  std::lock_guard lock(*mu_);
  if (auto it = instances_.find(instance_id); it != instances_.end()) it->second->alive = false;
}

std::vector<std::string> SyntheticProvider::RunningJobs(const std::string& instance_id) const {
  std::lock_guard lock(*mu_);
  auto it = instances_.find(instance_id);
  if (it == instances_.end() || !it->second->alive) return {};
  return it->second->running;
}

bool SyntheticProvider::FinishJob(const std::string& instance_id, const std::string& job_id,
                                  bool success) {
  std::lock_guard lock(*mu_);
  auto it = instances_.find(instance_id);
  if (it == instances_.end() || !it->second->alive) return false;
  State& s = *it->second;
  auto pos = std::find(s.running.begin(), s.running.end(), job_id);
  if (pos == s.running.end()) return false;
  s.running.erase(pos);
  JobResult result;
  result.job_id = job_id;
  result.status = success ? JobStatus::kSucceeded : JobStatus::kFailed;
  if (!success) result.error = "internal: injected failure";
  s.finished[job_id] = std::move(result);
  return true;
}

std::vector<std::string> SyntheticProvider::LiveInstances() const {
  std::lock_guard lock(*mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : instances_) {
    if (s->alive) out.push_back(id);
  }
  return out;
}

}  // namespace nluforge
