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

#include "cli.h"

#include <gtest/gtest.h>

#include <chrono>
#include <memory>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include "fixtures.h"
#include "json.hpp"
#include "nluforge/service.h"
#include "nluforge/sim_provider.h"
#include "nluforge/store.h"

namespace nluforge {
namespace {

using nlohmann::json;
using testing::FixtureDir;
using testing::TempDir;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun RunNluforge(std::vector<std::string> args) {
  args.insert(args.begin(), "nluforge");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::ostringstream out, err;
  CliRun run;
  run.code = RunCli(static_cast<int>(args.size()), argv.data(), out, err);
  run.out = out.str();
  run.err = err.str();
  return run;
}

class CliTest : public ::testing::Test {
 protected:
  std::string Root() const { return (dir_.path() / "store").string(); }

  CliRun Local(std::vector<std::string> args) {
    args.insert(args.begin(), {"--store-root", Root()});
    return RunNluforge(std::move(args));
  }

  CliRun ImportFixture(const std::string& name, const std::string& file) {
    return Local({"dataset", "import", "--format", "conll", "--name", name, "--in",
                  (FixtureDir() / file).string()});
  }

  TempDir dir_;
};

TEST(CliUsageTest, ExitCodes) {
  EXPECT_EQ(RunNluforge({}).code, 2);
  EXPECT_EQ(RunNluforge({"--help"}).code, 0);
  EXPECT_EQ(RunNluforge({"--no-such-flag"}).code, 2);
  EXPECT_EQ(RunNluforge({"train"}).code, 2);  // --corpus is required
  EXPECT_EQ(RunNluforge({"dataset", "import", "--format", "xml", "--in", "x", "--name", "y"}).code, 2);
}

TEST_F(CliTest, ImportListExportValidate) {
  const CliRun imported = ImportFixture("toy", "toy_separable.conll");
  ASSERT_EQ(imported.code, 0) << imported.err;
  EXPECT_NE(imported.out.find("39 utterances"), std::string::npos) << imported.out;

  const CliRun list = Local({"dataset", "list"});
  EXPECT_EQ(list.code, 0);
  EXPECT_EQ(list.out.rfind("toy ", 0), 0u) << list.out;

  const CliRun exported = Local({"dataset", "export", "--name", "toy", "--format", "conll"});
  EXPECT_EQ(exported.code, 0);
  EXPECT_EQ(exported.out, testing::ReadFixture("toy_separable.conll"));

  const CliRun validated = Local({"--json", "dataset", "validate", "--name", "toy"});
  ASSERT_EQ(validated.code, 0) << validated.err;
  EXPECT_EQ(json::parse(validated.out)["ok"], true);
}

TEST_F(CliTest, ApiErrorsExitOne) {
  EXPECT_EQ(Local({"dataset", "export", "--name", "absent"}).code, 1);
  EXPECT_EQ(Local({"dataset", "import", "--name", "x", "--in",
                   (dir_.path() / "missing.conll").string()})
                .code,
            1);
  EXPECT_EQ(Local({"jobs", "show", "job-424242"}).code, 1);
  const CliRun bad = Local({"--json", "test", "--corpus", "absent", "--model", "m", "--wait"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(json::parse(bad.err)["code"], "not_found") << bad.err;
}

TEST_F(CliTest, InvalidHyperparametersAreUsageErrors) {
  ASSERT_EQ(ImportFixture("toy", "toy_separable.conll").code, 0);
  EXPECT_EQ(Local({"train", "--corpus", "toy", "--epochs", "0", "--wait"}).code, 2);
  EXPECT_EQ(Local({"gridsearch", "--corpus", "toy", "--grid", "depth=1"}).code, 2);
}

TEST_F(CliTest, TrainThenTestLocally) {
  ASSERT_EQ(ImportFixture("ps", "confusable.conll").code, 0);
  const CliRun trained = Local({"--json", "train", "--corpus", "ps", "--model", "ps-model",
                                "--epochs", "10", "--wait"});
  ASSERT_EQ(trained.code, 0) << trained.err << trained.out;
  const json job = json::parse(trained.out);
  EXPECT_EQ(job["state"], "succeeded");
  EXPECT_EQ(job["result"]["model_key"], "models/ps-model");

  const CliRun tested =
      Local({"--json", "test", "--corpus", "ps", "--model", "ps-model", "--wait"});
  ASSERT_EQ(tested.code, 0) << tested.err << tested.out;
  const json test_job = json::parse(tested.out);
  EXPECT_EQ(test_job["result"]["metrics"]["eval_split"], "test");
  // Each invocation has a fresh scheduler; ids must not restart.
  EXPECT_NE(test_job["job_id"], job["job_id"]);
  const std::string report = test_job["result"]["report_key"];

  const CliRun cell = Local({"reports", "cell", report.substr(8), "--level", "token_label",
                             "--gold", "B-adjust_brightness", "--pred", "B-adjust_color"});
  EXPECT_EQ(cell.code, 0) << cell.err;

  const CliRun models = Local({"models", "list"});
  EXPECT_NE(models.out.find("models/ps-model"), std::string::npos);
  const auto archive = dir_.path() / "ps.model";
  EXPECT_EQ(Local({"models", "download", "--name", "ps-model", "--out", archive.string()}).code,
            0);
  FilesystemStore store(Root());
  EXPECT_EQ(testing::ReadFile(archive), store.Get(ObjectKey{Namespace::kModels, "ps-model"}));
}

// The CLI is a thin client of the REST surface: the same steps through the
// service directly leave byte-identical artifacts.
TEST_F(CliTest, MatchesRestSurface) {
  ASSERT_EQ(ImportFixture("toy", "toy_separable.conll").code, 0);
  ASSERT_EQ(Local({"train", "--corpus", "toy", "--model", "m", "--epochs", "4", "--seed", "7",
                   "--wait"})
                .code,
            0);

  TempDir other;
  auto store = std::make_shared<FilesystemStore>(other.path());
  SchedulerOptions options;
  auto scheduler =
      std::make_shared<Scheduler>(std::make_shared<InProcessProvider>(*store), options);
  double now = 0;
  Service service(store, scheduler, [&now] { return now; });
  ApiResponse r = service.Handle(
      {"POST", "/api/v1/datasets", {},
       json{{"format", "conll"}, {"name", "toy"},
            {"payload", testing::ReadFixture("toy_separable.conll")}}
           .dump()});
  ASSERT_EQ(r.status, 201);
  r = service.Handle({"POST", "/api/v1/jobs", {},
                      json{{"kind", "train"},
                           {"corpus", "toy"},
                           {"model", "m"},
                           {"hyper", {{"epochs", 4}, {"seed", 7}}}}
                          .dump()});
  ASSERT_EQ(r.status, 202);
  const std::string id = json::parse(r.body)["job_id"];
  for (int i = 0; i < 2000; ++i) {
    now += 0.01;
    scheduler->RunOnce(now);
    if (scheduler->GetJob(id)->state == JobState::kSucceeded) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ASSERT_EQ(scheduler->GetJob(id)->state, JobState::kSucceeded);

  FilesystemStore cli_store(Root());
  EXPECT_EQ(cli_store.Get(ObjectKey{Namespace::kDatasets, "toy"}),
            store->Get(ObjectKey{Namespace::kDatasets, "toy"}));
  EXPECT_EQ(cli_store.Get(ObjectKey{Namespace::kModels, "m"}),
            store->Get(ObjectKey{Namespace::kModels, "m"}));
  EXPECT_EQ(cli_store.Latest(ObjectKey{Namespace::kModels, "m"}).counter(), 1);
}

}  // namespace
}  // namespace nluforge
