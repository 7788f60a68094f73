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

#include "nluforge/service.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <sstream>
#include <utility>

#include "nluforge/converters.h"
#include "nluforge/error.h"
#include "nluforge/evaluation.h"
#include "nluforge/http_util.h"
#include "nluforge/ir_io.h"
#include "nluforge/job.h"
#include "nluforge/providers.h"
#include "nluforge/sim_provider.h"

extern char** environ;

namespace nluforge {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kPrefix = "/api/v1";

ApiResponse JsonResponse(int status, const ordered_json& body) {
  return ApiResponse{status, "application/json", body.dump()};
}

ApiResponse ErrorResponse(int status, std::string_view code, std::string_view message,
                          const json& details = nullptr) {
  return JsonResponse(status, ApiErrorBody(status, code, message, details));
}

json ParseBody(const ApiRequest& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

std::optional<std::string> Query(const ApiRequest& req, const std::string& name) {
  auto it = req.query.find(name);
  if (it == req.query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

bool AllDigits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

std::int64_t ParseInt(std::string_view s, std::string_view what) {
  if (!AllDigits(s) || s.size() > 15) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be a non-negative integer");
  }
  return std::stoll(std::string(s));
}

// A version given either as a full VersionId or as its counter.
VersionId ResolveVersion(ArtifactStore& store, const ObjectKey& key, const std::string& text) {
  if (AllDigits(text)) return store.ByCounter(key, ParseInt(text, "version"));
  VersionId id(text);
  for (const auto& info : store.ListVersions(key)) {
    if (info.id == id) return id;
  }
  throw Error(ErrorCode::kNotFound, "no version " + text + " of " + key.ToString());
}

VersionId VersionFromQuery(ArtifactStore& store, const ObjectKey& key, const ApiRequest& req) {
  if (auto v = Query(req, "version")) return ResolveVersion(store, key, *v);
  return store.Latest(key);
}

std::string StripPrefix(const std::string& key, Namespace ns) {
  const std::string prefix = std::string(NamespaceName(ns)) + "/";
  return key.rfind(prefix, 0) == 0 ? key.substr(prefix.size()) : key;
}

ordered_json IssueToJson(const ValidationIssue& issue) {
  ordered_json out;
  out["utterance_id"] = issue.utterance_id ? ordered_json(*issue.utterance_id)
                                           : ordered_json(nullptr);
  out["severity"] = issue.severity == Severity::kError ? "error" : "warning";
  out["code"] = issue.code;
  out["message"] = issue.message;
  out["position"] = issue.position ? ordered_json(*issue.position) : ordered_json(nullptr);
  return out;
}

ordered_json IssuesToJson(const std::vector<ValidationIssue>& issues) {
  ordered_json out = ordered_json::array();
  for (const auto& i : issues) out.push_back(IssueToJson(i));
  return out;
}

ordered_json VersionsToJson(const std::vector<VersionInfo>& versions) {
  ordered_json out = ordered_json::array();
  for (const auto& v : versions) {
    ordered_json row;
    row["id"] = v.id.str();
    row["counter"] = v.id.counter();
    row["size"] = v.size;
    row["created_at"] = v.created_at;
    out.push_back(std::move(row));
  }
  return out;
}

// Offset cursors over an already materialized list.
ordered_json Page(const std::vector<ordered_json>& items, const ApiRequest& req) {
  std::size_t offset = 0;
  if (auto c = Query(req, "cursor")) offset = static_cast<std::size_t>(ParseInt(*c, "cursor"));
  std::size_t limit = kDefaultPageSize;
  if (auto l = Query(req, "limit")) {
    limit = static_cast<std::size_t>(ParseInt(*l, "limit"));
    if (limit == 0 || limit > static_cast<std::size_t>(kMaxPageSize)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "limit must be between 1 and " + std::to_string(kMaxPageSize));
    }
  }
  ordered_json out;
  ordered_json page = ordered_json::array();
  for (std::size_t i = offset; i < items.size() && i < offset + limit; ++i) {
    page.push_back(items[i]);
  }
  out["items"] = std::move(page);
  out["total"] = items.size();
  out["next_cursor"] = offset + limit < items.size() ? ordered_json(std::to_string(offset + limit))
                                                     : ordered_json(nullptr);
  return out;
}

UtterancePatch PatchFromJson(const json& in) {
  UtterancePatch patch;
  try {
    if (auto it = in.find("text"); it != in.end()) patch.text = it->get<std::string>();
    if (auto it = in.find("intent"); it != in.end()) {
      patch.intent = it->is_null() ? std::optional<std::string>()
                                   : std::optional<std::string>(it->get<std::string>());
    }
    if (auto it = in.find("slots"); it != in.end()) {
      std::vector<SlotSpan> slots;
      for (const auto& s : *it) {
        slots.push_back(SlotSpan{s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>(),
                                 s.at("label").get<std::string>()});
      }
      patch.slots = std::move(slots);
    }
    if (auto it = in.find("split"); it != in.end()) patch.split = ParseSplit(it->get<std::string>());
    if (auto it = in.find("meta"); it != in.end()) {
      patch.meta = it->get<std::map<std::string, std::string>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed patch: ") + e.what());
  }
  if (patch.empty()) throw Error(ErrorCode::kInvalidArgument, "patch changes nothing");
  return patch;
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

double WallClockSeconds() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Service::Service(std::shared_ptr<ArtifactStore> store, std::shared_ptr<Scheduler> scheduler,
                 std::function<double()> clock)
    : store_(std::move(store)), scheduler_(std::move(scheduler)), clock_(std::move(clock)) {
  if (!clock_) clock_ = WallClockSeconds;
}

ApiResponse Service::Handle(const ApiRequest& request) {
  try {
    return Route(request);
  } catch (const Error& e) {
    const int status = HttpStatusFor(e.code());
    return ErrorResponse(status, ErrorCodeName(e.code()), e.what());
  } catch (const json::exception& e) {
    return ErrorResponse(400, ErrorCodeName(ErrorCode::kInvalidArgument), e.what());
  } catch (const std::exception& e) {
    return ErrorResponse(500, ErrorCodeName(ErrorCode::kInternal), e.what());
  }
}

ApiResponse Service::Route(const ApiRequest& req) {
  if (req.path.rfind(kPrefix, 0) != 0) {
    return ErrorResponse(404, "route_not_found", "no route for " + req.path);
  }
  const std::string rest = req.path.substr(kPrefix.size());
  const std::string& m = req.method;
  auto wrong_method = [&] {
    return ErrorResponse(405, "method_not_allowed", m + " is not allowed on " + req.path);
  };

  if (rest == "/healthz") {
    if (m != "GET") return wrong_method();
    ordered_json body;
    body["status"] = "ok";
    return JsonResponse(200, body);
  }

  if (rest == "/datasets") {
    if (m == "GET") return ListDatasets(req);
    if (m == "POST") return ImportDataset(req);
    return wrong_method();
  }
  if (rest.rfind("/datasets/", 0) == 0) {
    const std::string tail = rest.substr(10);
    if (auto pos = tail.find("/utterances/"); pos != std::string::npos) {
      if (m != "PATCH") return wrong_method();
      return PatchUtterance(tail.substr(0, pos), tail.substr(pos + 12), req);
    }
    if (EndsWith(tail, "/validate")) {
      if (m != "POST") return wrong_method();
      return ValidateDataset(tail.substr(0, tail.size() - 9), req);
    }
    if (EndsWith(tail, "/export")) {
      if (m != "GET") return wrong_method();
      return ExportDataset(tail.substr(0, tail.size() - 7), req);
    }
    if (m != "GET") return wrong_method();
    return GetDataset(tail, req);
  }

  if (rest == "/jobs") {
    if (m == "GET") return ListJobs(req);
    if (m == "POST") return SubmitJob(req);
    return wrong_method();
  }
  if (rest.rfind("/jobs/", 0) == 0) {
    std::string id = rest.substr(6);
    if (EndsWith(id, "/cancel")) {
      if (m != "POST") return wrong_method();
      id = id.substr(0, id.size() - 7);
      scheduler_->CancelJob(id, clock_());
      return JsonResponse(200, JobRecordToJson(*scheduler_->GetJob(id)));
    }
    const bool logs = EndsWith(id, "/logs");
    if (logs) id = id.substr(0, id.size() - 5);
    if (m != "GET") return wrong_method();
    auto job = scheduler_->GetJob(id);
    if (!job) throw Error(ErrorCode::kNotFound, "unknown job '" + id + "'");
    if (logs) {
      std::string text;
      if (job->result) {
        for (const auto& line : job->result->log_tail) text += line + "\n";
      }
      return ApiResponse{200, "text/plain", text};
    }
    return JsonResponse(200, JobRecordToJson(*job));
  }

  if (rest == "/reports") {
    if (m != "GET") return wrong_method();
    std::vector<ordered_json> items;
    for (const auto& key : store_->ListKeys(Namespace::kReports)) {
      ordered_json row;
      row["key"] = key.ToString();
      row["versions"] = VersionsToJson(store_->ListVersions(key));
      items.push_back(std::move(row));
    }
    return JsonResponse(200, Page(items, req));
  }
  if (rest.rfind("/reports/", 0) == 0) {
    const std::string tail = rest.substr(9);
    if (m != "GET") return wrong_method();
    if (EndsWith(tail, "/confusion/cell")) return GetCell(tail.substr(0, tail.size() - 15), req);
    if (EndsWith(tail, "/confusion")) return GetConfusion(tail.substr(0, tail.size() - 10), req);
    return GetReport(tail, req);
  }

  if (rest == "/instances") {
    if (m == "GET") {
      std::vector<ordered_json> items;
      for (const auto& r : scheduler_->ListInstances()) items.push_back(InstanceToJson(r));
      return JsonResponse(200, Page(items, req));
    }
    if (m == "POST") {
      const InstanceConfig config = InstanceConfigFromJson(ParseBody(req));
      return JsonResponse(201, InstanceToJson(scheduler_->CreateInstance(config, clock_())));
    }
    return wrong_method();
  }
  if (rest.rfind("/instances/", 0) == 0) {
    const std::string id = rest.substr(11);
    if (m == "GET") {
      auto r = scheduler_->GetInstance(id);
      if (!r) throw Error(ErrorCode::kNotFound, "unknown instance '" + id + "'");
      return JsonResponse(200, InstanceToJson(*r));
    }
    if (m == "DELETE") return JsonResponse(200, InstanceToJson(scheduler_->StopInstance(id, clock_())));
    return wrong_method();
  }

  if (rest == "/models") {
    if (m != "GET") return wrong_method();
    return ListModels(req);
  }
  if (rest.rfind("/models/", 0) == 0 && EndsWith(rest, "/download")) {
    if (m != "GET") return wrong_method();
    return DownloadModel(rest.substr(8, rest.size() - 8 - 9), req);
  }

  return ErrorResponse(404, "route_not_found", "no route for " + req.path);
}

ApiResponse Service::ImportDataset(const ApiRequest& req) {
  const json body = ParseBody(req);
  if (!body.contains("format") || !body.contains("name")) {
    throw Error(ErrorCode::kInvalidArgument, "import needs 'format' and 'name'");
  }
  const DatasetFormat format = ParseDatasetFormat(body.at("format").get<std::string>());
  const std::string name = body.at("name").get<std::string>();
  ValidateObjectName(name);
  std::string payload;
  if (auto it = body.find("payload"); it != body.end() && it->is_string()) {
    payload = it->get<std::string>();
  } else if (auto p = body.find("payload_path"); p != body.end() && p->is_string()) {
    std::ifstream in(p->get<std::string>(), std::ios::binary);
    if (!in) throw Error(ErrorCode::kNotFound, "cannot read " + p->get<std::string>());
    std::ostringstream ss;
    ss << in.rdbuf();
    payload = ss.str();
  } else {
    throw Error(ErrorCode::kInvalidArgument, "import needs 'payload' or 'payload_path'");
  }

  ImportResult result = nluforge::ImportDataset(format, payload, ImportOptions{name, name});
  result.corpus.id = name;
  result.corpus.name = name;
  VersionId version;
  {
    std::lock_guard lock(dataset_mu_);
    version = SaveCorpus(*store_, result.corpus);
  }
  ordered_json out;
  out["name"] = name;
  out["key"] = ObjectKey{Namespace::kDatasets, name}.ToString();
  out["version"] = version.str();
  out["corpus_version"] = version.counter();
  out["n_utterances"] = result.corpus.utterances.size();
  out["intents"] = result.corpus.intents;
  out["slot_types"] = result.corpus.slot_types;
  ordered_json report;
  report["utterances_in"] = result.report.utterances_in;
  report["utterances_out"] = result.report.utterances_out;
  ordered_json dropped = ordered_json::array();
  for (const auto& [id, reason] : result.report.dropped) {
    dropped.push_back(ordered_json{{"id", id}, {"reason", reason}});
  }
  report["dropped"] = std::move(dropped);
  report["issues"] = IssuesToJson(result.report.issues);
  out["report"] = std::move(report);
  return JsonResponse(201, out);
}

ApiResponse Service::ListDatasets(const ApiRequest& req) {
  std::vector<ordered_json> items;
  for (const auto& key : store_->ListKeys(Namespace::kDatasets)) {
    const auto versions = store_->ListVersions(key);
    if (versions.empty()) continue;
    ordered_json row;
    row["name"] = key.name;
    row["latest_version"] = versions.back().id.str();
    row["corpus_version"] = versions.back().id.counter();
    row["versions"] = VersionsToJson(versions);
    items.push_back(std::move(row));
  }
  return JsonResponse(200, Page(items, req));
}

ApiResponse Service::GetDataset(const std::string& name, const ApiRequest& req) {
  const ObjectKey key{Namespace::kDatasets, name};
  const VersionId version = VersionFromQuery(*store_, key, req);
  const Corpus corpus = LoadCorpus(*store_, name, version);
  std::vector<ordered_json> utterances;
  for (const auto& u : corpus.utterances) utterances.push_back(UtteranceToJson(u));
  ordered_json page = Page(utterances, req);
  ordered_json out;
  out["name"] = name;
  out["corpus_id"] = corpus.id;
  out["version"] = version.str();
  out["corpus_version"] = corpus.version;
  out["intents"] = corpus.intents;
  out["slot_types"] = corpus.slot_types;
  out["n_utterances"] = corpus.utterances.size();
  out["utterances"] = std::move(page["items"]);
  out["next_cursor"] = std::move(page["next_cursor"]);
  return JsonResponse(200, out);
}

ApiResponse Service::ExportDataset(const std::string& name, const ApiRequest& req) {
  const ObjectKey key{Namespace::kDatasets, name};
  const VersionId version = VersionFromQuery(*store_, key, req);
  const DatasetFormat format = ParseDatasetFormat(Query(req, "format").value_or("ir"));
  const Corpus corpus = LoadCorpus(*store_, name, version);
  return ApiResponse{200, "text/plain", nluforge::ExportDataset(format, corpus)};
}

ApiResponse Service::ValidateDataset(const std::string& name, const ApiRequest& req) {
  const ObjectKey key{Namespace::kDatasets, name};
  const VersionId version = VersionFromQuery(*store_, key, req);
  const auto issues = ValidateCorpus(LoadCorpus(*store_, name, version));
  ordered_json out;
  out["name"] = name;
  out["version"] = version.str();
  out["ok"] = !HasErrors(issues);
  out["issues"] = IssuesToJson(issues);
  return JsonResponse(200, out);
}

ApiResponse Service::PatchUtterance(const std::string& name, const std::string& uid,
                                    const ApiRequest& req) {
  const json body = ParseBody(req);
  auto ev = body.find("expected_version");
  if (ev == body.end() || ev->is_null()) {
    throw Error(ErrorCode::kInvalidArgument, "PATCH requires expected_version");
  }
  const std::int64_t expected = ev->is_number_integer()
                                    ? ev->get<std::int64_t>()
                                    : VersionId(ev->get<std::string>()).counter();
  const UtterancePatch patch = PatchFromJson(body.contains("patch") ? body.at("patch") : body);

  const ObjectKey key{Namespace::kDatasets, name};
  std::lock_guard lock(dataset_mu_);
  const VersionId latest = store_->Latest(key);
  if (expected != latest.counter()) {
    return ErrorResponse(409, ErrorCodeName(ErrorCode::kConflict),
                         "dataset '" + name + "' is at version " +
                             std::to_string(latest.counter()) + ", not " +
                             std::to_string(expected),
                         json{{"current_version", latest.counter()},
                              {"current_version_id", latest.str()}});
  }
  const Corpus corpus = LoadCorpus(*store_, name, latest);
  const Corpus updated = EditUtterance(corpus, uid, patch, expected);
  const VersionId version = SaveCorpus(*store_, updated);
  ordered_json out;
  out["name"] = name;
  out["version"] = version.str();
  out["corpus_version"] = version.counter();
  out["utterance"] = UtteranceToJson(*updated.Find(uid));
  return JsonResponse(200, out);
}

ApiResponse Service::SubmitJob(const ApiRequest& req) {
  json body = ParseBody(req);
  if (!body.is_object()) throw Error(ErrorCode::kInvalidArgument, "job body must be an object");
  if (!body.contains("corpus_key") && body.contains("corpus")) body["corpus_key"] = body["corpus"];
  if (!body.contains("model_key") && body.contains("model")) body["model_key"] = body["model"];
  if (!body.contains("corpus_key")) throw Error(ErrorCode::kInvalidArgument, "job needs corpus_key");

  const std::string corpus = StripPrefix(body["corpus_key"].get<std::string>(), Namespace::kDatasets);
  ValidateObjectName(corpus);
  const ObjectKey corpus_key{Namespace::kDatasets, corpus};
  auto pin = [&](const char* field, const ObjectKey& key) {
    auto it = body.find(field);
    if (it == body.end() || it->is_null()) {
      body[field] = store_->Latest(key).str();
    } else if (it->is_number_integer()) {
      body[field] = store_->ByCounter(key, it->get<std::int64_t>()).str();
    } else {
      body[field] = ResolveVersion(*store_, key, it->get<std::string>()).str();
    }
  };
  pin("corpus_version", corpus_key);
  if (body.value("kind", std::string()) == "test" && body.contains("model_key") &&
      body["model_key"].is_string()) {
    const std::string model = StripPrefix(body["model_key"].get<std::string>(), Namespace::kModels);
    ValidateObjectName(model);
    pin("model_version", ObjectKey{Namespace::kModels, model});
  }

  SubmitRequest request;
  request.spec = JobSpecFromJson(body);
  auto opt_string = [&](const char* field) -> std::optional<std::string> {
    auto it = body.find(field);
    if (it == body.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
  };
  request.target_instance = opt_string("target_instance");
  request.owner = opt_string("owner");
  request.idempotency_key = opt_string("idempotency_key");
  const std::string id = scheduler_->SubmitJob(std::move(request), clock_());
  return JsonResponse(202, JobRecordToJson(*scheduler_->GetJob(id)));
}

ApiResponse Service::ListJobs(const ApiRequest& req) {
  const auto state = Query(req, "state");
  std::vector<ordered_json> items;
  for (const auto& job : scheduler_->ListJobs()) {
    if (state && JobStateName(job.state) != *state) continue;
    items.push_back(JobRecordToJson(job));
  }
  return JsonResponse(200, Page(items, req));
}

ApiResponse Service::GetReport(const std::string& key_text, const ApiRequest& req) {
  const ObjectKey key{Namespace::kReports, StripPrefix(key_text, Namespace::kReports)};
  const VersionId version = VersionFromQuery(*store_, key, req);
  const ReportDocument doc = ParseReportDocument(store_->Get(key, version));
  ordered_json out;
  out["key"] = key.ToString();
  out["version"] = version.str();
  out["report"] = ReportToJson(doc.report);
  return JsonResponse(200, out);
}

ApiResponse Service::GetConfusion(const std::string& key_text, const ApiRequest& req) {
  const ObjectKey key{Namespace::kReports, StripPrefix(key_text, Namespace::kReports)};
  const VersionId version = VersionFromQuery(*store_, key, req);
  const ReportDocument doc = ParseReportDocument(store_->Get(key, version));
  const ConfusionLevel level = ParseConfusionLevel(Query(req, "level").value_or("intent"));
  ordered_json out;
  out["key"] = key.ToString();
  out["version"] = version.str();
  out.update(ConfusionToJson(level == ConfusionLevel::kIntent ? doc.intent : doc.token_label));
  return JsonResponse(200, out);
}

ApiResponse Service::GetCell(const std::string& key_text, const ApiRequest& req) {
  const ObjectKey key{Namespace::kReports, StripPrefix(key_text, Namespace::kReports)};
  const VersionId version = VersionFromQuery(*store_, key, req);
  const auto gold = Query(req, "gold");
  const auto pred = Query(req, "pred");
  if (!gold || !pred) throw Error(ErrorCode::kInvalidArgument, "cell lookup needs gold and pred");
  const ReportDocument doc = ParseReportDocument(store_->Get(key, version));
  const ConfusionLevel level = ParseConfusionLevel(Query(req, "level").value_or("intent"));
  const auto refs =
      DrillDown(level == ConfusionLevel::kIntent ? doc.intent : doc.token_label, *gold, *pred);
  std::vector<ordered_json> items;
  for (const auto& ref : refs) items.push_back(InstanceToJson(ref));
  ordered_json out;
  out["key"] = key.ToString();
  out["version"] = version.str();
  out["level"] = ConfusionLevelName(level);
  out["gold"] = *gold;
  out["pred"] = *pred;
  out["count"] = refs.size();
  out.update(Page(items, req));
  return JsonResponse(200, out);
}

ApiResponse Service::ListModels(const ApiRequest& req) {
  std::vector<ordered_json> items;
  for (const auto& key : store_->ListKeys(Namespace::kModels)) {
    const auto versions = store_->ListVersions(key);
    if (versions.empty()) continue;
    ordered_json row;
    row["key"] = key.ToString();
    row["name"] = key.name;
    row["latest_version"] = versions.back().id.str();
    row["versions"] = VersionsToJson(versions);
    items.push_back(std::move(row));
  }
  return JsonResponse(200, Page(items, req));
}

ApiResponse Service::DownloadModel(const std::string& key_text, const ApiRequest& req) {
  const ObjectKey key{Namespace::kModels, StripPrefix(key_text, Namespace::kModels)};
  const VersionId version = VersionFromQuery(*store_, key, req);
  return ApiResponse{200, "application/octet-stream", nluforge::DownloadModel(*store_, key, version)};
}

GatewayConfig GatewayConfigFromJson(const json& in, GatewayConfig c) {
  if (!in.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  try {
    if (auto it = in.find("pool"); it != in.end()) c.pool = PoolPolicyFromJson(*it, c.pool);
    c.tick_period_s = in.value("tick_period_s", c.tick_period_s);
    c.retry_cap = in.value("retry_cap", c.retry_cap);
    c.heartbeat_timeout_s = in.value("heartbeat_timeout_s", c.heartbeat_timeout_s);
    c.instance_slots = in.value("instance_slots", c.instance_slots);
    c.provider = in.value("provider", c.provider);
    c.store_root = in.value("store_root", c.store_root);
    c.host = in.value("host", c.host);
    c.port = in.value("port", c.port);
    c.ui_dir = in.value("ui_dir", c.ui_dir);
    c.worker_binary = in.value("worker_binary", c.worker_binary);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  return c;
}

GatewayConfig LoadGatewayConfig(const std::optional<std::filesystem::path>& file,
                                const std::map<std::string, std::string>& env) {
  GatewayConfig c;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot read config " + file->string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
    }
    c = GatewayConfigFromJson(doc, c);
  }
  auto get = [&](const char* name) -> std::optional<std::string> {
    auto it = env.find(name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  };
  auto number = [&](const char* name, auto& field) {
    auto v = get(name);
    if (!v) return;
    try {
      std::size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
      field = static_cast<std::remove_reference_t<decltype(field)>>(d);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("NLUFORGE_") + name + " is not a number: '" + *v + "'");
    }
  };
  if (auto v = get("STORE_ROOT")) c.store_root = *v;
  if (auto v = get("PROVIDER")) c.provider = *v;
  if (auto v = get("HOST")) c.host = *v;
  if (auto v = get("UI_DIR")) c.ui_dir = *v;
  if (auto v = get("WORKER_BINARY")) c.worker_binary = *v;
  number("PORT", c.port);
  number("TICK_PERIOD_S", c.tick_period_s);
  number("RETRY_CAP", c.retry_cap);
  number("HEARTBEAT_TIMEOUT_S", c.heartbeat_timeout_s);
  number("INSTANCE_SLOTS", c.instance_slots);
  number("POOL_MIN_READY", c.pool.min_ready);
  number("POOL_MAX_INSTANCES", c.pool.max_instances);
  number("POOL_SCALE_UP_QUEUE_THRESHOLD", c.pool.scale_up_queue_threshold);
  number("POOL_IDLE_SHUTDOWN_S", c.pool.idle_shutdown_s);

  ValidatePoolPolicy(c.pool);
  if (c.provider != "simulated" && c.provider != "subprocess") {
    throw Error(ErrorCode::kInvalidArgument, "provider must be 'simulated' or 'subprocess'");
  }
  if (c.tick_period_s <= 0) throw Error(ErrorCode::kInvalidArgument, "tick_period_s must be positive");
  if (c.retry_cap < 1) throw Error(ErrorCode::kInvalidArgument, "retry_cap must be positive");
  if (c.instance_slots < 1) throw Error(ErrorCode::kInvalidArgument, "instance_slots must be positive");
  if (c.port < 0 || c.port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range");
  return c;
}

std::map<std::string, std::string> NluforgeEnvironment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    if (entry.rfind("NLUFORGE_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    out[std::string(entry.substr(9, eq - 9))] = std::string(entry.substr(eq + 1));
  }
  return out;
}

SchedulerLoop::SchedulerLoop(std::shared_ptr<Scheduler> scheduler, double period_s,
                             std::function<double()> clock)
    : scheduler_(std::move(scheduler)), period_s_(period_s), clock_(std::move(clock)) {
  thread_ = std::jthread([this](std::stop_token stop) {
    const auto period = std::chrono::duration<double>(period_s_);
    while (!stop.stop_requested()) {
      try {
        scheduler_->RunOnce(clock_());
      } catch (...) {
        // A failed round is retried on the next tick.
      }
      std::unique_lock lock(mu_);
      cv_.wait_for(lock, stop, period, [] { return false; });
    }
  });
}

SchedulerLoop::~SchedulerLoop() {
  thread_.request_stop();
  if (thread_.joinable()) thread_.join();
}

std::uint64_t NextJobNumber(ArtifactStore& store) {
  std::uint64_t next = 1;
  for (const Namespace ns : {Namespace::kModels, Namespace::kReports}) {
    for (const ObjectKey& key : store.ListKeys(ns)) {
      if (key.name.size() <= 4 || key.name.rfind("job-", 0) != 0) continue;
      const std::string digits = key.name.substr(4);
      if (digits.size() > 18 ||
          !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        continue;
      }
      next = std::max<std::uint64_t>(next, std::stoull(digits) + 1);
    }
  }
  return next;
}

Stack::Stack(const GatewayConfig& config) : config_(config) {
  store_ = std::make_shared<FilesystemStore>(config_.store_root);
  if (config_.provider == "subprocess") {
    SubprocessOptions options;
    options.worker_binary = config_.worker_binary;
    options.store_root = std::filesystem::absolute(config_.store_root);
    provider_ = std::make_shared<SubprocessProvider>(options);
  } else {
    provider_ = std::make_shared<InProcessProvider>(*store_);
  }
  SchedulerOptions options;
  options.pool = config_.pool;
  options.retry_cap = config_.retry_cap;
  options.heartbeat_timeout_s = config_.heartbeat_timeout_s;
  options.default_instance.capacity_slots = config_.instance_slots;
  options.first_job_number = NextJobNumber(*store_);
  scheduler_ = std::make_shared<Scheduler>(provider_, options);
  service_ = std::make_unique<Service>(store_, scheduler_, WallClockSeconds);
  loop_ = std::make_unique<SchedulerLoop>(scheduler_, config_.tick_period_s, WallClockSeconds);
}

Stack::~Stack() {
  loop_.reset();
  service_.reset();
  scheduler_.reset();
}

}  // namespace nluforge
