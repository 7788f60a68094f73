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

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>

#include "fixtures.h"
#include "json.hpp"
#include "nluforge/error.h"
#include "nluforge/ir_io.h"
#include "nluforge/sim_provider.h"
#include "nluforge/store.h"

namespace nluforge {
namespace {

using nlohmann::json;
using testing::ReadFixture;
using testing::TempDir;

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    store_ = std::make_shared<FilesystemStore>(dir_.path() / "store");
    SchedulerOptions options;
    options.pool.min_ready = 1;
    options.pool.max_instances = 2;
    options.default_instance.capacity_slots = 1;
    scheduler_ = std::make_shared<Scheduler>(std::make_shared<InProcessProvider>(*store_),
                                             options);
    service_ = std::make_unique<Service>(store_, scheduler_, [this] { return now_; });
  }

  ApiResponse Call(const std::string& method, const std::string& path,
                   const json& body = nullptr, std::map<std::string, std::string> query = {}) {
    ApiRequest req;
    req.method = method;
    req.path = "/api/v1" + path;
    req.query = std::move(query);
    if (!body.is_null()) req.body = body.dump();
    return service_->Handle(req);
  }

  json CallJson(const std::string& method, const std::string& path, const json& body = nullptr,
                std::map<std::string, std::string> query = {}) {
    return json::parse(Call(method, path, body, std::move(query)).body);
  }

  json Import(const std::string& name, const std::string& fixture,
              const std::string& format = "conll") {
    const ApiResponse r = Call("POST", "/datasets",
                               {{"format", format}, {"name", name},
                                {"payload", ReadFixture(fixture)}});
    EXPECT_EQ(r.status, 201) << r.body;
    return json::parse(r.body);
  }

  // Ticks the scheduler until the job is terminal.
  json WaitJob(const std::string& id) {
    for (int i = 0; i < 3000; ++i) {
      now_ += 0.01;
      scheduler_->RunOnce(now_);
      json job = CallJson("GET", "/jobs/" + id);
      const std::string state = job["state"];
      if (state == "succeeded" || state == "failed" || state == "cancelled") return job;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ADD_FAILURE() << "job " << id << " did not finish";
    return nullptr;
  }

  TempDir dir_;
  double now_ = 1000.0;
  std::shared_ptr<FilesystemStore> store_;
  std::shared_ptr<Scheduler> scheduler_;
  std::unique_ptr<Service> service_;
};

void ExpectApiError(const ApiResponse& r, int status, const std::string& code) {
  EXPECT_EQ(r.status, status) << r.body;
  const json body = json::parse(r.body);
  EXPECT_EQ(body["http_status"], status);
  EXPECT_EQ(body["code"], code);
  EXPECT_TRUE(body["message"].is_string());
  EXPECT_TRUE(body.contains("details"));
}

TEST_F(ServiceTest, Healthz) {
  const ApiResponse r = Call("GET", "/healthz");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(json::parse(r.body)["status"], "ok");
}

TEST_F(ServiceTest, UnknownRouteAndWrongMethod) {
  ExpectApiError(Call("GET", "/nope"), 404, "route_not_found");
  ApiRequest outside{"GET", "/other", {}, ""};
  ExpectApiError(service_->Handle(outside), 404, "route_not_found");
  ExpectApiError(Call("DELETE", "/datasets"), 405, "method_not_allowed");
  ExpectApiError(Call("POST", "/healthz"), 405, "method_not_allowed");
  ExpectApiError(Call("GET", "/datasets/x/validate"), 405, "method_not_allowed");
}

TEST_F(ServiceTest, ImportReportsShape) {
  const json out = Import("toy", "toy_separable.conll");
  EXPECT_EQ(out["name"], "toy");
  EXPECT_EQ(out["key"], "datasets/toy");
  EXPECT_EQ(out["corpus_version"], 1);
  EXPECT_EQ(out["n_utterances"], 39);
  EXPECT_EQ(out["version"].get<std::string>().size(), 25u);
  EXPECT_EQ(out["report"]["utterances_in"], 39);
  EXPECT_EQ(out["report"]["utterances_out"], 39);
  EXPECT_TRUE(out["report"]["dropped"].empty());
  EXPECT_TRUE(out["slot_types"].is_array());
}

TEST_F(ServiceTest, ImportErrors) {
  ExpectApiError(Call("POST", "/datasets", {{"format", "conll"}}), 400, "invalid_argument");
  ExpectApiError(Call("POST", "/datasets", {{"format", "yaml"}, {"name", "a"}, {"payload", ""}}),
                 400, "invalid_argument");
  ExpectApiError(Call("POST", "/datasets", {{"format", "conll"}, {"name", "a"}}), 400,
                 "invalid_argument");
  ExpectApiError(Call("POST", "/datasets", {{"format", "conll"}, {"name", "../x"}, {"payload", ""}}),
                 400, "invalid_argument");
  ExpectApiError(Call("POST", "/datasets",
                      {{"format", "intent_json"}, {"name", "a"}, {"payload", "not json"}}),
                 400, "parse_error");
  ApiRequest raw{"POST", "/api/v1/datasets", {}, "{broken"};
  ExpectApiError(service_->Handle(raw), 400, "invalid_argument");
  ExpectApiError(Call("POST", "/datasets",
                      {{"format", "conll"}, {"name", "a"},
                       {"payload_path", (dir_.path() / "missing.conll").string()}}),
                 404, "not_found");
}

TEST_F(ServiceTest, ImportFromPayloadPath) {
  const auto path = testing::FixtureDir() / "confusable.conll";
  const ApiResponse r = Call("POST", "/datasets",
                             {{"format", "conll"}, {"name", "ps"}, {"payload_path", path.string()}});
  ASSERT_EQ(r.status, 201) << r.body;
  EXPECT_EQ(json::parse(r.body)["n_utterances"], 29);
}

TEST_F(ServiceTest, ListAndGetDatasets) {
  Import("toy", "toy_separable.conll");
  Import("ps", "confusable.conll");
  const json list = CallJson("GET", "/datasets");
  ASSERT_EQ(list["total"], 2);
  EXPECT_EQ(list["items"][0]["name"], "ps");
  EXPECT_EQ(list["items"][1]["name"], "toy");
  EXPECT_EQ(list["items"][1]["corpus_version"], 1);
  EXPECT_TRUE(list["next_cursor"].is_null());

  const json got = CallJson("GET", "/datasets/toy");
  EXPECT_EQ(got["corpus_id"], "toy");
  EXPECT_EQ(got["n_utterances"], 39);
  EXPECT_EQ(got["utterances"].size(), 39u);
  EXPECT_EQ(got["utterances"][0]["id"], "toy001");

  ExpectApiError(Call("GET", "/datasets/absent"), 404, "not_found");
}

TEST_F(ServiceTest, PaginationWalksEveryItemOnce) {
  Import("toy", "toy_separable.conll");
  std::vector<std::string> ids;
  std::map<std::string, std::string> query{{"limit", "10"}};
  for (int pages = 0; pages < 10; ++pages) {
    const json page = CallJson("GET", "/datasets/toy", nullptr, query);
    for (const auto& u : page["utterances"]) ids.push_back(u["id"]);
    if (page["next_cursor"].is_null()) break;
    query["cursor"] = page["next_cursor"];
  }
  ASSERT_EQ(ids.size(), 39u);
  EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), 39u);

  ExpectApiError(Call("GET", "/datasets/toy", nullptr, {{"limit", "0"}}), 400, "invalid_argument");
  ExpectApiError(Call("GET", "/datasets/toy", nullptr, {{"limit", "1001"}}), 400,
                 "invalid_argument");
  ExpectApiError(Call("GET", "/datasets/toy", nullptr, {{"cursor", "abc"}}), 400,
                 "invalid_argument");
}

TEST_F(ServiceTest, ExportMatchesImport) {
  Import("toy", "toy_separable.conll");
  const ApiResponse r = Call("GET", "/datasets/toy/export", nullptr, {{"format", "conll"}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.content_type, "text/plain");
  EXPECT_EQ(r.body, ReadFixture("toy_separable.conll"));
}

TEST_F(ServiceTest, ValidateReportsOk) {
  Import("toy", "toy_separable.conll");
  const json out = CallJson("POST", "/datasets/toy/validate");
  EXPECT_EQ(out["ok"], true);
  EXPECT_EQ(out["name"], "toy");
}

TEST_F(ServiceTest, PatchCreatesVersionAndDetectsConflict) {
  Import("toy", "toy_separable.conll");
  const ApiResponse ok = Call("PATCH", "/datasets/toy/utterances/toy001",
                              {{"expected_version", 1}, {"patch", {{"intent", "play_music"}}}});
  ASSERT_EQ(ok.status, 200) << ok.body;
  const json out = json::parse(ok.body);
  EXPECT_EQ(out["corpus_version"], 2);
  EXPECT_EQ(out["utterance"]["id"], "toy001");

  const ApiResponse stale = Call("PATCH", "/datasets/toy/utterances/toy001",
                                 {{"expected_version", 1}, {"patch", {{"text", "play it"}}}});
  ExpectApiError(stale, 409, "conflict");
  const json details = json::parse(stale.body)["details"];
  EXPECT_EQ(details["current_version"], 2);
  EXPECT_EQ(details["current_version_id"], out["version"]);

  // Older versions stay readable.
  const json v1 = CallJson("GET", "/datasets/toy", nullptr, {{"version", "1"}});
  EXPECT_EQ(v1["corpus_version"], 1);

  ExpectApiError(Call("PATCH", "/datasets/toy/utterances/toy001", {{"patch", json::object()}}),
                 400, "invalid_argument");
  ExpectApiError(Call("PATCH", "/datasets/toy/utterances/nobody",
                      {{"expected_version", 2}, {"patch", {{"intent", "play_music"}}}}),
                 404, "not_found");
}

TEST_F(ServiceTest, TrainAndTestThroughJobs) {
  Import("toy", "toy_separable.conll");
  const ApiResponse submitted =
      Call("POST", "/jobs",
           {{"kind", "train"}, {"corpus", "toy"}, {"model", "toy-model"},
            {"hyper", {{"epochs", 10}}}});
  ASSERT_EQ(submitted.status, 202) << submitted.body;
  const json record = json::parse(submitted.body);
  EXPECT_EQ(record["state"], "queued");
  EXPECT_EQ(record["spec"]["corpus_version"].get<std::string>().size(), 25u);

  const json trained = WaitJob(record["job_id"]);
  ASSERT_EQ(trained["state"], "succeeded") << trained.dump();
  EXPECT_EQ(trained["result"]["model_key"], "models/toy-model");

  const ApiResponse logs = Call("GET", "/jobs/" + record["job_id"].get<std::string>() + "/logs");
  EXPECT_EQ(logs.content_type, "text/plain");
  EXPECT_FALSE(logs.body.empty());

  const json models = CallJson("GET", "/models");
  ASSERT_EQ(models["total"], 1);
  EXPECT_EQ(models["items"][0]["key"], "models/toy-model");
  const ApiResponse archive = Call("GET", "/models/toy-model/download");
  EXPECT_EQ(archive.status, 200);
  EXPECT_EQ(archive.content_type, "application/octet-stream");
  EXPECT_EQ(archive.body, store_->Get(ObjectKey{Namespace::kModels, "toy-model"}));

  const json test_job = CallJson("POST", "/jobs",
                                 {{"kind", "test"}, {"corpus", "toy"}, {"model", "toy-model"}});
  EXPECT_EQ(test_job["spec"]["model_version"], models["items"][0]["latest_version"]);
  const json tested = WaitJob(test_job["job_id"]);
  ASSERT_EQ(tested["state"], "failed");  // the toy corpus has no test split
  EXPECT_NE(tested["error"].get<std::string>().find("empty_split"), std::string::npos);

  const std::string report_key = trained["result"]["report_key"];
  const json report = CallJson("GET", "/" + report_key);
  EXPECT_EQ(report["key"], report_key);
  EXPECT_EQ(report["report"]["intent_accuracy"], 1.0);

  const json reports = CallJson("GET", "/reports");
  EXPECT_EQ(reports["total"], 1);

  const json listed = CallJson("GET", "/jobs", nullptr, {{"state", "failed"}});
  EXPECT_EQ(listed["total"], 1);
}

TEST_F(ServiceTest, ConfusionAndCellDrillDown) {
  Import("ps", "confusable.conll");
  const json trained = WaitJob(CallJson("POST", "/jobs",
                                        {{"kind", "train"}, {"corpus", "ps"}, {"model", "ps"}})["job_id"]);
  ASSERT_EQ(trained["state"], "succeeded") << trained.dump();
  const json tested = WaitJob(
      CallJson("POST", "/jobs", {{"kind", "test"}, {"corpus", "ps"}, {"model", "ps"}})["job_id"]);
  ASSERT_EQ(tested["state"], "succeeded") << tested.dump();
  const std::string key = tested["result"]["report_key"];

  const json matrix = CallJson("GET", "/" + key + "/confusion", nullptr, {{"level", "token_label"}});
  EXPECT_EQ(matrix["level"], "token_label");
  long long mass = 0;
  for (const auto& cell : matrix["cells"]) mass += cell["count"].get<long long>();
  EXPECT_EQ(matrix["mass"], mass);

  for (const auto& cell : matrix["cells"]) {
    const json drill = CallJson("GET", "/" + key + "/confusion/cell", nullptr,
                                {{"level", "token_label"},
                                 {"gold", cell["gold"]},
                                 {"pred", cell["pred"]},
                                 {"limit", "1000"}});
    EXPECT_EQ(drill["count"], cell["count"]);
    EXPECT_EQ(drill["items"].size(), cell["count"].get<std::size_t>());
  }

  ExpectApiError(Call("GET", "/" + key + "/confusion/cell"), 400, "invalid_argument");
  ExpectApiError(Call("GET", "/" + key + "/confusion", nullptr, {{"level", "bogus"}}), 400,
                 "invalid_argument");
  ExpectApiError(Call("GET", "/reports/none"), 404, "not_found");
}

TEST_F(ServiceTest, JobErrors) {
  ExpectApiError(Call("POST", "/jobs", {{"kind", "train"}}), 400, "invalid_argument");
  ExpectApiError(Call("POST", "/jobs", {{"kind", "train"}, {"corpus", "missing"}}), 404,
                 "not_found");
  Import("toy", "toy_separable.conll");
  ExpectApiError(Call("POST", "/jobs", {{"kind", "fly"}, {"corpus", "toy"}}), 400,
                 "invalid_argument");
  ExpectApiError(Call("POST", "/jobs", {{"kind", "test"}, {"corpus", "toy"}}), 400,
                 "invalid_argument");
  ExpectApiError(Call("POST", "/jobs", {{"kind", "train"}, {"corpus", "toy"},
                                        {"target_instance", "i-999999"}}),
                 404, "not_found");
  ExpectApiError(Call("GET", "/jobs/job-999999"), 404, "not_found");
}

TEST_F(ServiceTest, CancelQueuedJob) {
  Import("toy", "toy_separable.conll");
  const json job = CallJson("POST", "/jobs", {{"kind", "train"}, {"corpus", "toy"}});
  const json cancelled = CallJson("POST", "/jobs/" + job["job_id"].get<std::string>() + "/cancel");
  EXPECT_EQ(cancelled["state"], "cancelled");
}

TEST_F(ServiceTest, IdempotentSubmit) {
  Import("toy", "toy_separable.conll");
  const json body = {{"kind", "train"}, {"corpus", "toy"}, {"idempotency_key", "k1"}};
  const json a = CallJson("POST", "/jobs", body);
  const json b = CallJson("POST", "/jobs", body);
  EXPECT_EQ(a["job_id"], b["job_id"]);
  EXPECT_EQ(CallJson("GET", "/jobs")["total"], 1);
}

TEST_F(ServiceTest, InstancesLifecycle) {
  const ApiResponse created = Call("POST", "/instances", {{"capacity_slots", 2}});
  ASSERT_EQ(created.status, 201) << created.body;
  const json inst = json::parse(created.body);
  const std::string id = inst["instance_id"];
  EXPECT_EQ(CallJson("GET", "/instances/" + id)["instance_id"], id);
  EXPECT_EQ(CallJson("GET", "/instances")["total"], 1);
  const json stopped = CallJson("DELETE", "/instances/" + id);
  EXPECT_NE(stopped["state"], "ready");
  ExpectApiError(Call("GET", "/instances/i-999999"), 404, "not_found");
  ExpectApiError(Call("PATCH", "/instances/" + id), 405, "method_not_allowed");
}

TEST(GatewayConfigTest, EnvironmentOverridesFile) {
  TempDir dir;
  const auto file = dir.path() / "gateway.json";
  {
    std::ofstream out(file);
    out << R"({"port": 9000, "retry_cap": 5, "pool": {"min_ready": 2, "max_instances": 6}})";
  }
  const GatewayConfig config =
      LoadGatewayConfig(file, {{"PORT", "9100"}, {"POOL_MAX_INSTANCES", "8"}});
  EXPECT_EQ(config.port, 9100);
  EXPECT_EQ(config.retry_cap, 5);
  EXPECT_EQ(config.pool.min_ready, 2);
  EXPECT_EQ(config.pool.max_instances, 8);
  EXPECT_EQ(config.provider, "simulated");
}

TEST(GatewayConfigTest, RejectsBadValues) {
  EXPECT_THROW(LoadGatewayConfig(std::nullopt, {{"PORT", "eighty"}}), Error);
  EXPECT_THROW(LoadGatewayConfig(std::nullopt, {{"PROVIDER", "cloud"}}), Error);
  EXPECT_THROW(LoadGatewayConfig(std::nullopt,
                                 {{"POOL_MIN_READY", "5"},
                                  {"POOL_MAX_INSTANCES", "2"}}),
               Error);
  EXPECT_THROW(GatewayConfigFromJson(json::array()), Error);
}

TEST(StackTest, UnwritableStoreRootThrowsIo) {
  TempDir dir;
  const auto blocker = dir.path() / "file";
  std::ofstream(blocker) << "x";
  GatewayConfig config;
  config.store_root = (blocker / "store").string();
  try {
    Stack stack(config);
    FAIL() << "expected an io error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(StackTest, NextJobNumberFollowsStoredJobs) {
  TempDir dir;
  FilesystemStore store(dir.path());
  EXPECT_EQ(NextJobNumber(store), 1u);
  store.Put(ObjectKey{Namespace::kModels, "job-000007"}, "m");
  store.Put(ObjectKey{Namespace::kReports, "job-000003"}, "r");
  store.Put(ObjectKey{Namespace::kModels, "job-x"}, "m");
  store.Put(ObjectKey{Namespace::kReports, "mine"}, "r");
  EXPECT_EQ(NextJobNumber(store), 8u);
}

}  // namespace
}  // namespace nluforge
