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

#ifndef NLUFORGE_JOB_H_
#define NLUFORGE_JOB_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nluforge/evaluation.h"
#include "nluforge/features.h"
#include "nluforge/grid_search.h"
#include "nluforge/ir.h"
#include "nluforge/models.h"
#include "nluforge/store.h"

namespace nluforge {

enum class JobKind { kTrain, kTest, kGridSearch };

std::string_view JobKindName(JobKind kind);
JobKind ParseJobKind(std::string_view name);

struct JobSpec {
  std::string job_id;
  JobKind kind = JobKind::kTrain;
  std::string corpus;  // name in the datasets namespace
  std::optional<VersionId> corpus_version;
  std::optional<std::string> model;  // name in the models namespace (test)
  std::optional<VersionId> model_version;
  Hyperparams hyper;
  HyperGrid grid;  // grid_search only
  SelectionMetric metric = SelectionMetric::kMean;
  std::vector<std::uint64_t> seeds;  // k > 1: train k models, keep the median
};

// Kind-dependent required fields: test needs model + model_version,
// grid_search a non-empty grid. Throws Error(kInvalidArgument).
void ValidateJobSpec(const JobSpec& spec);

nlohmann::ordered_json JobSpecToJson(const JobSpec& spec);
// Throws Error(kInvalidArgument) on malformed specs.
JobSpec JobSpecFromJson(const nlohmann::json& object);

enum class JobStatus { kSucceeded, kFailed };

struct JobResult {
  std::string job_id;
  JobStatus status = JobStatus::kFailed;
  std::optional<std::string> model_key;
  std::optional<VersionId> model_version;
  std::optional<std::string> report_key;
  std::optional<VersionId> report_version;
  std::optional<std::string> error;  // present iff failed
  double wall_time_s = 0.0;
  std::vector<std::string> log_tail;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
};

nlohmann::ordered_json JobResultToJson(const JobResult& result);
JobResult JobResultFromJson(const nlohmann::json& object);

struct UtilizationReport {
  std::string instance_id;
  bool busy = false;
  std::optional<std::string> running_job;
  std::vector<std::string> running_jobs;
  int capacity_slots = 1;
  int used_slots = 0;
  double uptime_s = 0.0;
  bool queue_accepting = true;
};

nlohmann::ordered_json UtilizationToJson(const UtilizationReport& report);
UtilizationReport UtilizationFromJson(const nlohmann::json& object);

// Corpus snapshots in the artifact store. The stored bytes are IR JSON Lines
// and the corpus version is the store version counter.
Corpus LoadCorpus(ArtifactStore& store, const std::string& name,
                  const std::optional<VersionId>& version = std::nullopt);
VersionId SaveCorpus(ArtifactStore& store, const Corpus& corpus);

// What a train or test job stores under the reports namespace.
struct ReportDocument {
  EvaluationReport report;
  ConfusionMatrix intent;
  ConfusionMatrix token_label;
  std::vector<Prediction> predictions;
};

ReportDocument EvaluateModel(const JointModel& model, const Corpus& corpus,
                             Split split);
std::string SerializeReportDocument(const ReportDocument& document);
ReportDocument ParseReportDocument(std::string_view data);

}  // namespace nluforge

#endif  // NLUFORGE_JOB_H_
