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

#include "nluforge/worker.h"

#include <algorithm>
#include <numeric>
#include <utility>

#include "nluforge/error.h"
#include "nluforge/grid_search.h"
#include "nluforge/model_io.h"

namespace nluforge {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json MetricsJson(const DevMetrics& m, SelectionMetric metric) {
  ordered_json out;
  out["intent_accuracy"] = m.intent_accuracy ? ordered_json(*m.intent_accuracy)
                                             : ordered_json(nullptr);
  out["slot_f1"] = m.slot_f1;
  out["score"] = SelectionScore(m, metric);
  return out;
}

std::string FailureMessage(const Error& e) {
  return std::string(ErrorCodeName(e.code())) + ": " + e.what();
}

}  // namespace

std::string_view WorkerJobStateName(WorkerJobState state) {
  switch (state) {
    case WorkerJobState::kRunning: return "running";
    case WorkerJobState::kSucceeded: return "succeeded";
    case WorkerJobState::kFailed: return "failed";
  }
  return "running";
}

WorkerJobState ParseWorkerJobState(std::string_view name) {
  if (name == "running") return WorkerJobState::kRunning;
  if (name == "succeeded") return WorkerJobState::kSucceeded;
  if (name == "failed") return WorkerJobState::kFailed;
  throw Error(ErrorCode::kParse, "unknown worker job state '" + std::string(name) + "'");
}

ordered_json WorkerJobToJson(const WorkerJobView& view) {
  ordered_json out;
  out["job_id"] = view.job_id;
  out["kind"] = JobKindName(view.kind);
  out["state"] = WorkerJobStateName(view.state);
  out["result"] = view.result ? JobResultToJson(*view.result) : ordered_json(nullptr);
  return out;
}

WorkerJobView WorkerJobFromJson(const json& in) {
  try {
    WorkerJobView view;
    view.job_id = in.at("job_id").get<std::string>();
    view.kind = ParseJobKind(in.at("kind").get<std::string>());
    view.state = ParseWorkerJobState(in.at("state").get<std::string>());
    if (auto it = in.find("result"); it != in.end() && !it->is_null()) {
      view.result = JobResultFromJson(*it);
    }
    return view;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed worker job: ") + e.what());
  }
}

std::size_t MedianIndex(const std::vector<double>& scores) {
  if (scores.empty()) throw Error(ErrorCode::kInvalidArgument, "median of nothing");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order[(order.size() - 1) / 2];
}

Worker::Worker(ArtifactStore& store, WorkerOptions options)
    : store_(store), options_(std::move(options)), started_(std::chrono::steady_clock::now()) {
  if (options_.capacity_slots < 1) {
    throw Error(ErrorCode::kInvalidArgument, "capacity_slots must be positive");
  }
}

Worker::~Worker() {
  std::vector<Runner> runners;
  {
    std::lock_guard lock(mu_);
    runners.swap(runners_);
  }
  runners.clear();  // joins
}

void Worker::SetCompletionCallback(std::function<void(const JobResult&)> callback) {
  std::lock_guard lock(mu_);
  on_complete_ = std::move(callback);
}

void Worker::Admit(const JobSpec& spec) {
  ++used_slots_;
  running_.push_back(spec.job_id);
  Entry& entry = jobs_[spec.job_id];
  entry.view.job_id = spec.job_id;
  entry.view.kind = spec.kind;
  entry.view.state = WorkerJobState::kRunning;
}

JobResult Worker::HandleTrain(const JobSpec& spec) {
  if (spec.kind == JobKind::kTest) {
    throw Error(ErrorCode::kInvalidArgument, "train handler received a test job");
  }
  if (spec.job_id.empty()) throw Error(ErrorCode::kInvalidArgument, "job spec has no job_id");
  {
    std::lock_guard lock(mu_);
    if (jobs_.count(spec.job_id)) {
      throw Error(ErrorCode::kConflict, "job '" + spec.job_id + "' already exists");
    }
    if (used_slots_ >= options_.capacity_slots) {
      throw Error(ErrorCode::kBusy, "no free slot on " + options_.instance_id);
    }
    Admit(spec);
  }
  JobResult result = Run(spec);
  Finish(result);
  return *Job(spec.job_id)->result;
}

JobResult Worker::HandleTest(const JobSpec& spec) {
  if (spec.kind != JobKind::kTest) {
    throw Error(ErrorCode::kInvalidArgument, "test handler received a non-test job");
  }
  if (spec.job_id.empty()) throw Error(ErrorCode::kInvalidArgument, "job spec has no job_id");
  {
    std::lock_guard lock(mu_);
    if (jobs_.count(spec.job_id)) {
      throw Error(ErrorCode::kConflict, "job '" + spec.job_id + "' already exists");
    }
    if (used_slots_ >= options_.capacity_slots) {
      throw Error(ErrorCode::kBusy, "no free slot on " + options_.instance_id);
    }
    Admit(spec);
  }
  JobResult result = Run(spec);
  Finish(result);
  return *Job(spec.job_id)->result;
}

UtilizationReport Worker::HandleIsFree() const {
  UtilizationReport report;
  report.instance_id = options_.instance_id;
  report.capacity_slots = options_.capacity_slots;
  report.uptime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_)
                        .count();
  std::lock_guard lock(mu_);
  report.used_slots = used_slots_;
  report.busy = used_slots_ > 0;
  report.running_jobs = running_;
  if (!running_.empty()) report.running_job = running_.front();
  report.queue_accepting = used_slots_ < options_.capacity_slots;
  return report;
}

Worker::Admission Worker::Submit(const JobSpec& spec) {
  if (spec.job_id.empty()) throw Error(ErrorCode::kInvalidArgument, "job spec has no job_id");
  ValidateObjectName(spec.job_id);
  std::lock_guard lock(mu_);
  ReapThreads();
  if (jobs_.count(spec.job_id)) return Admission::kAccepted;
  if (used_slots_ >= options_.capacity_slots) return Admission::kBusy;
  Admit(spec);
  auto finished = std::make_shared<std::atomic<bool>>(false);
  runners_.push_back(Runner{finished, std::jthread([this, spec, finished] {
                              Finish(Run(spec));
                              finished->store(true);
                            })});
  return Admission::kAccepted;
}

void Worker::ReapThreads() {
  std::erase_if(runners_, [](Runner& r) { return r.finished->load(); });
}

std::optional<WorkerJobView> Worker::Job(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second.view;
}

std::optional<std::string> Worker::Logs(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  std::string text;
  for (const auto& line : it->second.log) text += line + "\n";
  return text;
}

std::optional<JobResult> Worker::Wait(const std::string& job_id) {
  std::unique_lock lock(mu_);
  if (!jobs_.count(job_id)) return std::nullopt;
  done_cv_.wait(lock, [&] { return jobs_.at(job_id).view.result.has_value(); });
  return jobs_.at(job_id).view.result;
}

void Worker::AppendLog(const std::string& job_id, std::string line) {
  std::lock_guard lock(mu_);
  auto& log = jobs_[job_id].log;
  log.push_back(std::move(line));
  while (log.size() > options_.log_tail_lines) log.pop_front();
}

void Worker::Finish(const JobResult& result) {
  std::function<void(const JobResult&)> callback;
  JobResult final_result = result;
  {
    std::lock_guard lock(mu_);
    Entry& entry = jobs_[result.job_id];
    final_result.log_tail.assign(entry.log.begin(), entry.log.end());
    entry.view.state = result.status == JobStatus::kSucceeded ? WorkerJobState::kSucceeded
                                                              : WorkerJobState::kFailed;
    entry.view.result = final_result;
    std::erase(running_, result.job_id);
    --used_slots_;
    callback = on_complete_;
  }
  done_cv_.notify_all();
  if (callback) callback(final_result);
}

JobResult Worker::Run(const JobSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  JobResult result;
  result.job_id = spec.job_id;
  AppendLog(spec.job_id, std::string(JobKindName(spec.kind)) + " job " + spec.job_id +
                             " started on " + options_.instance_id);
  try {
    ValidateJobSpec(spec);
    // Passed by copy: a moved-from result must stay usable in the handlers.
    if (spec.kind == JobKind::kTest) {
      result = RunTest(spec, result);
    } else {
      result = RunTrain(spec, result);
    }
    result.status = JobStatus::kSucceeded;
    result.error.reset();
    AppendLog(spec.job_id, "succeeded");
  } catch (const Error& e) {
    result.status = JobStatus::kFailed;
    result.error = FailureMessage(e);
    AppendLog(spec.job_id, "failed: " + *result.error);
  } catch (const std::exception& e) {
    result.status = JobStatus::kFailed;
    result.error = std::string("internal: ") + e.what();
    AppendLog(spec.job_id, "failed: " + *result.error);
  }
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

JobResult Worker::RunTrain(const JobSpec& spec, JobResult result) {
  const std::string where = spec.corpus_version ? spec.corpus_version->str() : "latest";
  AppendLog(spec.job_id, "loading corpus datasets/" + spec.corpus + "@" + where);
  const Corpus corpus = LoadCorpus(store_, spec.corpus, spec.corpus_version);
  const auto issues = ValidateCorpus(corpus);
  for (const auto& issue : issues) {
    if (issue.severity == Severity::kError) {
      throw Error(ErrorCode::kValidation, "corpus is invalid: " + issue.code + ": " + issue.message);
    }
  }

  const Split eval = corpus.InSplit(Split::kDev).empty() ? Split::kTrain : Split::kDev;
  ordered_json metrics;
  metrics["eval_split"] = SplitName(eval);
  metrics["selection_metric"] = SelectionMetricName(spec.metric);

  JointModel model;
  DevMetrics dev;
  if (spec.kind == JobKind::kGridSearch) {
    AppendLog(spec.job_id, "grid search over " +
                               std::to_string(EnumerateGrid(spec.grid, spec.hyper).size()) +
                               " points");
    GridSearchResult grid =
        GridSearch(corpus, spec.grid, spec.metric, spec.hyper, options_.grid_parallelism);
    for (std::size_t i = 0; i < grid.leaderboard.size(); ++i) {
      AppendLog(spec.job_id, "point " + std::to_string(i) + " " +
                                 HyperparamsToJson(grid.leaderboard[i].hyper).dump() +
                                 " score=" + std::to_string(grid.leaderboard[i].score));
    }
    model = TrainJoint(corpus, grid.best);
    dev = grid.leaderboard[grid.best_index].metrics;
    metrics["grid"] = GridResultToJson(grid);
  } else {
    std::vector<std::uint64_t> seeds = spec.seeds;
    if (seeds.empty()) seeds.push_back(spec.hyper.seed);
    std::vector<JointModel> models;
    std::vector<DevMetrics> devs;
    std::vector<double> scores;
    for (std::uint64_t seed : seeds) {
      Hyperparams hyper = spec.hyper;
      hyper.seed = seed;
      AppendLog(spec.job_id, "training " + HyperparamsToJson(hyper).dump());
      models.push_back(TrainJoint(corpus, hyper));
      devs.push_back(EvaluateOnSplit(models.back(), corpus, eval));
      scores.push_back(SelectionScore(devs.back(), spec.metric));
      AppendLog(spec.job_id, "seed " + std::to_string(seed) + " " +
                                 std::string(SplitName(eval)) +
                                 " score=" + std::to_string(scores.back()));
    }
    const std::size_t pick = MedianIndex(scores);
    model = std::move(models[pick]);
    dev = devs[pick];
    if (seeds.size() > 1) {
      ordered_json per_seed = ordered_json::array();
      double intent_sum = 0.0, slot_sum = 0.0;
      bool have_intent = true;
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        ordered_json row;
        row["seed"] = seeds[i];
        row.update(MetricsJson(devs[i], spec.metric));
        per_seed.push_back(std::move(row));
        if (devs[i].intent_accuracy) {
          intent_sum += *devs[i].intent_accuracy;
        } else {
          have_intent = false;
        }
        slot_sum += devs[i].slot_f1;
      }
      const double k = static_cast<double>(seeds.size());
      ordered_json mean;
      mean["intent_accuracy"] = have_intent ? ordered_json(intent_sum / k) : ordered_json(nullptr);
      mean["slot_f1"] = slot_sum / k;
      metrics["per_seed"] = std::move(per_seed);
      metrics["mean"] = std::move(mean);
      metrics["selected_seed"] = seeds[pick];
    }
  }
  metrics.update(MetricsJson(dev, spec.metric));
  metrics["model_version"] = model.model_version;

  const ObjectKey model_key{Namespace::kModels, spec.model.value_or(spec.job_id)};
  result.model_version = store_.Put(model_key, SerializeModel(model));
  result.model_key = model_key.ToString();
  AppendLog(spec.job_id, "stored " + *result.model_key + "@" + result.model_version->str());

  const ObjectKey report_key{Namespace::kReports, spec.job_id};
  result.report_version =
      store_.Put(report_key, SerializeReportDocument(EvaluateModel(model, corpus, eval)));
  result.report_key = report_key.ToString();
  result.metrics = std::move(metrics);
  return result;
}

JobResult Worker::RunTest(const JobSpec& spec, JobResult result) {
  const ObjectKey model_key{Namespace::kModels, *spec.model};
  AppendLog(spec.job_id, "loading " + model_key.ToString() + "@" + spec.model_version->str());
  const JointModel model = DeserializeModel(store_.Get(model_key, spec.model_version));
  const std::string where = spec.corpus_version ? spec.corpus_version->str() : "latest";
  AppendLog(spec.job_id, "loading corpus datasets/" + spec.corpus + "@" + where);
  const Corpus corpus = LoadCorpus(store_, spec.corpus, spec.corpus_version);
  if (corpus.InSplit(Split::kTest).empty()) {
    throw Error(ErrorCode::kFailedPrecondition,
                "empty_split: corpus '" + corpus.id + "' has no test utterances");
  }
  const ReportDocument doc = EvaluateModel(model, corpus, Split::kTest);
  const ObjectKey report_key{Namespace::kReports, spec.job_id};
  result.report_version = store_.Put(report_key, SerializeReportDocument(doc));
  result.report_key = report_key.ToString();
  AppendLog(spec.job_id, "stored " + *result.report_key + "@" + result.report_version->str());

  ordered_json metrics;
  metrics["eval_split"] = "test";
  metrics["intent_accuracy"] = doc.report.intent_accuracy
                                   ? ordered_json(*doc.report.intent_accuracy)
                                   : ordered_json(nullptr);
  metrics["slot_precision"] = doc.report.slot_precision;
  metrics["slot_recall"] = doc.report.slot_recall;
  metrics["slot_f1"] = doc.report.slot_f1;
  metrics["model_version"] = model.model_version;
  result.metrics = std::move(metrics);
  return result;
}

}  // namespace nluforge
