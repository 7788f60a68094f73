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

#ifndef NLUFORGE_SERVICE_H_
#define NLUFORGE_SERVICE_H_

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "json.hpp"
#include "nluforge/scheduler.h"
#include "nluforge/store.h"

namespace nluforge {

struct ApiRequest {
  std::string method;  // GET, POST, PATCH, DELETE
  std::string path;    // starts with /api/v1
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Error codes carried by ApiError bodies: every ErrorCodeName() value plus
// "route_not_found", "method_not_allowed" and "store_unwritable".
inline constexpr int kDefaultPageSize = 100;
inline constexpr int kMaxPageSize = 1000;

// The REST surface as a pure request -> response function. The HTTP server
// and the local-mode CLI both call Handle(), so they share every code path.
class Service {
 public:
  Service(std::shared_ptr<ArtifactStore> store, std::shared_ptr<Scheduler> scheduler,
          std::function<double()> clock);

  ApiResponse Handle(const ApiRequest& request);

 private:
  ApiResponse Route(const ApiRequest& request);

  ApiResponse ImportDataset(const ApiRequest& request);
  ApiResponse ListDatasets(const ApiRequest& request);
  ApiResponse GetDataset(const std::string& name, const ApiRequest& request);
  ApiResponse ExportDataset(const std::string& name, const ApiRequest& request);
  ApiResponse ValidateDataset(const std::string& name, const ApiRequest& request);
  ApiResponse PatchUtterance(const std::string& name, const std::string& uid,
                             const ApiRequest& request);
  ApiResponse SubmitJob(const ApiRequest& request);
  ApiResponse ListJobs(const ApiRequest& request);
  ApiResponse GetReport(const std::string& key, const ApiRequest& request);
  ApiResponse GetConfusion(const std::string& key, const ApiRequest& request);
  ApiResponse GetCell(const std::string& key, const ApiRequest& request);
  ApiResponse ListModels(const ApiRequest& request);
  ApiResponse DownloadModel(const std::string& key, const ApiRequest& request);

  std::shared_ptr<ArtifactStore> store_;
  std::shared_ptr<Scheduler> scheduler_;
  std::function<double()> clock_;
  std::mutex dataset_mu_;  // read-check-write of dataset edits
};

// Seconds since the Unix epoch.
double WallClockSeconds();

struct GatewayConfig {
  PoolPolicy pool;
  double tick_period_s = 1.0;
  int retry_cap = 3;
  double heartbeat_timeout_s = 30.0;
  int instance_slots = 1;
  std::string provider = "simulated";  // or "subprocess"
  std::string store_root = "nluforge-store";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui_dir;         // static bundle served under /ui when set
  std::string worker_binary;  // subprocess provider; defaults to ourselves
};

// File values override defaults; entries of `env` override the file. Keys
// are NLUFORGE_* names with the prefix stripped: STORE_ROOT, PROVIDER, HOST,
// PORT, TICK_PERIOD_S, RETRY_CAP, HEARTBEAT_TIMEOUT_S, INSTANCE_SLOTS,
// UI_DIR, WORKER_BINARY, POOL_MIN_READY, POOL_MAX_INSTANCES,
// POOL_SCALE_UP_QUEUE_THRESHOLD, POOL_IDLE_SHUTDOWN_S.
// Throws Error(kInvalidArgument) on a bad file or value.
GatewayConfig LoadGatewayConfig(const std::optional<std::filesystem::path>& file,
                                const std::map<std::string, std::string>& env);
GatewayConfig GatewayConfigFromJson(const nlohmann::json& object, GatewayConfig base = {});

// NLUFORGE_* entries of the process environment, prefix stripped.
std::map<std::string, std::string> NluforgeEnvironment();

// Calls Scheduler::RunOnce every period on a background thread.
class SchedulerLoop {
 public:
  SchedulerLoop(std::shared_ptr<Scheduler> scheduler, double period_s,
                std::function<double()> clock);
  ~SchedulerLoop();

 private:
  std::shared_ptr<Scheduler> scheduler_;
  double period_s_;
  std::function<double()> clock_;
  std::mutex mu_;
  std::condition_variable_any cv_;
  std::jthread thread_;
};

// One past the highest "job-N" name under models/ and reports/, so job ids
// stay unique across restarts over the same store.
std::uint64_t NextJobNumber(ArtifactStore& store);

// Store, provider, scheduler, service and tick loop wired from a config.
class Stack {
 public:
  // Throws Error(kIo) when the store root is not writable.
  explicit Stack(const GatewayConfig& config);
  ~Stack();

  Service& service() { return *service_; }
  Scheduler& scheduler() { return *scheduler_; }
  ArtifactStore& store() { return *store_; }
  const GatewayConfig& config() const { return config_; }

 private:
  GatewayConfig config_;
  std::shared_ptr<ArtifactStore> store_;
  std::shared_ptr<InstanceProvider> provider_;
  std::shared_ptr<Scheduler> scheduler_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<SchedulerLoop> loop_;
};

}  // namespace nluforge

#endif  // NLUFORGE_SERVICE_H_
