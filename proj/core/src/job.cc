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

#include "nluforge/job.h"

#include "nluforge/error.h"
#include "nluforge/ir_io.h"

namespace nluforge {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json OptionalString(const std::optional<std::string>& value) {
  return value ? ordered_json(*value) : ordered_json(nullptr);
}

ordered_json OptionalVersion(const std::optional<VersionId>& value) {
  return value ? ordered_json(value->str()) : ordered_json(nullptr);
}

std::optional<std::string> ReadOptionalString(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<VersionId> ReadOptionalVersion(const json& obj, const char* key) {
  auto value = ReadOptionalString(obj, key);
  if (!value) return std::nullopt;
  return VersionId(*value);
}

// Accepts "datasets/name" or a bare name.
std::string StripNamespace(const std::string& key, Namespace expected) {
  const std::string prefix = std::string(NamespaceName(expected)) + "/";
  if (key.rfind(prefix, 0) == 0) return key.substr(prefix.size());
  return key;
}

}  // namespace

std::string_view JobKindName(JobKind kind) {
  switch (kind) {
    case JobKind::kTrain: return "train";
    case JobKind::kTest: return "test";
    case JobKind::kGridSearch: return "grid_search";
  }
  return "train";
}

JobKind ParseJobKind(std::string_view name) {
  if (name == "train") return JobKind::kTrain;
  if (name == "test") return JobKind::kTest;
  if (name == "grid_search" || name == "gridsearch") return JobKind::kGridSearch;
  throw Error(ErrorCode::kInvalidArgument, "unknown job kind '" + std::string(name) + "'");
}

void ValidateJobSpec(const JobSpec& spec) {
  if (spec.corpus.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "job spec names no corpus");
  }
  ValidateObjectName(spec.corpus);
  switch (spec.kind) {
    case JobKind::kTrain:
      ValidateHyperparams(spec.hyper);
      break;
    case JobKind::kTest:
      if (!spec.model || !spec.model_version) {
        throw Error(ErrorCode::kInvalidArgument,
                    "test jobs require model_key and model_version");
      }
      ValidateObjectName(*spec.model);
      break;
    case JobKind::kGridSearch:
      if (spec.grid.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "grid_search jobs require a grid");
      }
      EnumerateGrid(spec.grid, spec.hyper);
      break;
  }
}

ordered_json JobSpecToJson(const JobSpec& spec) {
  ordered_json out;
  out["job_id"] = spec.job_id;
  out["kind"] = JobKindName(spec.kind);
  out["corpus_key"] = std::string(NamespaceName(Namespace::kDatasets)) + "/" + spec.corpus;
  out["corpus_version"] = OptionalVersion(spec.corpus_version);
  out["model_key"] = spec.model ? ordered_json(std::string(NamespaceName(Namespace::kModels)) +
                                               "/" + *spec.model)
                                : ordered_json(nullptr);
  out["model_version"] = OptionalVersion(spec.model_version);
  out["hyper"] = HyperparamsToJson(spec.hyper);
  ordered_json grid = ordered_json::object();
  for (const auto& [name, values] : spec.grid) grid[name] = values;
  out["grid"] = std::move(grid);
  out["metric"] = SelectionMetricName(spec.metric);
  out["seeds"] = spec.seeds;
  return out;
}

JobSpec JobSpecFromJson(const json& in) {
  if (!in.is_object()) throw Error(ErrorCode::kInvalidArgument, "job spec must be an object");
  try {
    JobSpec spec;
    spec.job_id = in.value("job_id", std::string());
    spec.kind = ParseJobKind(in.at("kind").get<std::string>());
    spec.corpus = StripNamespace(in.at("corpus_key").get<std::string>(), Namespace::kDatasets);
    spec.corpus_version = ReadOptionalVersion(in, "corpus_version");
    if (auto model = ReadOptionalString(in, "model_key")) {
      spec.model = StripNamespace(*model, Namespace::kModels);
    }
    spec.model_version = ReadOptionalVersion(in, "model_version");
    if (auto it = in.find("hyper"); it != in.end() && !it->is_null()) {
      spec.hyper = HyperparamsFromJson(*it);
    }
    if (auto it = in.find("grid"); it != in.end() && !it->is_null()) {
      for (const auto& [name, values] : it->items()) {
        spec.grid[name] = values.get<std::vector<std::int64_t>>();
      }
    }
    if (auto it = in.find("metric"); it != in.end() && !it->is_null()) {
      spec.metric = ParseSelectionMetric(it->get<std::string>());
    }
    if (auto it = in.find("seeds"); it != in.end() && !it->is_null()) {
      spec.seeds = it->get<std::vector<std::uint64_t>>();
    }
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed job spec: ") + e.what());
  }
}

ordered_json JobResultToJson(const JobResult& r) {
  ordered_json out;
  out["job_id"] = r.job_id;
  out["status"] = r.status == JobStatus::kSucceeded ? "succeeded" : "failed";
  out["model_key"] = OptionalString(r.model_key);
  out["model_version"] = OptionalVersion(r.model_version);
  out["report_key"] = OptionalString(r.report_key);
  out["report_version"] = OptionalVersion(r.report_version);
  out["error"] = OptionalString(r.error);
  out["wall_time_s"] = r.wall_time_s;
  out["log_tail"] = r.log_tail;
  out["metrics"] = r.metrics;
  return out;
}

JobResult JobResultFromJson(const json& in) {
  try {
    JobResult r;
    r.job_id = in.at("job_id").get<std::string>();
    const auto status = in.at("status").get<std::string>();
    if (status != "succeeded" && status != "failed") {
      throw Error(ErrorCode::kParse, "unknown job status '" + status + "'");
    }
    r.status = status == "succeeded" ? JobStatus::kSucceeded : JobStatus::kFailed;
    r.model_key = ReadOptionalString(in, "model_key");
    r.model_version = ReadOptionalVersion(in, "model_version");
    r.report_key = ReadOptionalString(in, "report_key");
    r.report_version = ReadOptionalVersion(in, "report_version");
    r.error = ReadOptionalString(in, "error");
    r.wall_time_s = in.value("wall_time_s", 0.0);
    r.log_tail = in.value("log_tail", std::vector<std::string>{});
    if (auto it = in.find("metrics"); it != in.end()) {
      r.metrics = ordered_json::parse(it->dump());
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed job result: ") + e.what());
  }
}

ordered_json UtilizationToJson(const UtilizationReport& r) {
  ordered_json out;
  out["instance_id"] = r.instance_id;
  out["busy"] = r.busy;
  out["running_job"] = OptionalString(r.running_job);
  out["running_jobs"] = r.running_jobs;
  out["capacity_slots"] = r.capacity_slots;
  out["used_slots"] = r.used_slots;
  out["uptime_s"] = r.uptime_s;
  out["queue_accepting"] = r.queue_accepting;
  return out;
}

UtilizationReport UtilizationFromJson(const json& in) {
  try {
    UtilizationReport r;
    r.instance_id = in.at("instance_id").get<std::string>();
    r.busy = in.at("busy").get<bool>();
    r.running_job = ReadOptionalString(in, "running_job");
    r.running_jobs = in.value("running_jobs", std::vector<std::string>{});
    r.capacity_slots = in.at("capacity_slots").get<int>();
    r.used_slots = in.at("used_slots").get<int>();
    r.uptime_s = in.value("uptime_s", 0.0);
    r.queue_accepting = in.at("queue_accepting").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed utilization report: ") + e.what());
  }
}

Corpus LoadCorpus(ArtifactStore& store, const std::string& name,
                  const std::optional<VersionId>& version) {
  const ObjectKey key{Namespace::kDatasets, name};
  const VersionId resolved = version ? *version : store.Latest(key);
  Corpus corpus = ReadIrJsonl(store.Get(key, resolved), resolved.counter());
  return corpus;
}

VersionId SaveCorpus(ArtifactStore& store, const Corpus& corpus) {
  return store.Put(ObjectKey{Namespace::kDatasets, corpus.id}, WriteIrJsonl(corpus));
}

ReportDocument EvaluateModel(const JointModel& model, const Corpus& corpus,
                             Split split) {
  ReportDocument doc;
  for (const Utterance* u : corpus.InSplit(split)) {
    JointPrediction p = PredictJoint(model, u->tokens);
    doc.predictions.push_back(Prediction{u->id, std::move(p.intent), std::move(p.tags)});
  }
  doc.report = Evaluate(corpus, doc.predictions, model.model_version, split);
  doc.intent = BuildConfusionMatrix(corpus, doc.predictions, ConfusionLevel::kIntent, split);
  doc.token_label =
      BuildConfusionMatrix(corpus, doc.predictions, ConfusionLevel::kTokenLabel, split);
  return doc;
}

std::string SerializeReportDocument(const ReportDocument& doc) {
  ordered_json out;
  out["report"] = ReportToJson(doc.report);
  ordered_json confusion;
  confusion["intent"] = ConfusionToStorageJson(doc.intent);
  confusion["token_label"] = ConfusionToStorageJson(doc.token_label);
  out["confusion"] = std::move(confusion);
  ordered_json predictions = ordered_json::array();
  for (const auto& p : doc.predictions) predictions.push_back(PredictionToJson(p));
  out["predictions"] = std::move(predictions);
  return out.dump() + "\n";
}

ReportDocument ParseReportDocument(std::string_view data) {
  json in;
  try {
    in = json::parse(data);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("report document: ") + e.what());
  }
  try {
    ReportDocument doc;
    doc.report = ReportFromJson(in.at("report"));
    doc.intent = ConfusionFromStorageJson(in.at("confusion").at("intent"));
    doc.token_label = ConfusionFromStorageJson(in.at("confusion").at("token_label"));
    for (const auto& p : in.at("predictions")) doc.predictions.push_back(PredictionFromJson(p));
    return doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("report document: ") + e.what());
  }
}

}  // namespace nluforge
