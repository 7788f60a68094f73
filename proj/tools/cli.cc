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

#include <pthread.h>
#include <signal.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "nluforge/error.h"
#include "nluforge/features.h"
#include "nluforge/gateway_server.h"
#include "nluforge/grid_search.h"
#include "nluforge/http_util.h"
#include "nluforge/service.h"
#include "nluforge/store.h"
#include "nluforge/worker.h"
#include "nluforge/worker_server.h"

namespace nluforge {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using Query = std::map<std::string, std::string>;

constexpr int kExitOk = 0;
constexpr int kExitApi = 1;
constexpr int kExitUsage = 2;

class ApiClient {
 public:
  virtual ~ApiClient() = default;
  virtual ApiResponse Call(const std::string& method, const std::string& path,
                           const Query& query = {}, const std::string& body = "") = 0;
  virtual double poll_interval_s() const = 0;
  // Jobs submitted in local mode die with the process, so they always wait.
  virtual bool must_wait() const = 0;
};

class LocalClient : public ApiClient {
 public:
  explicit LocalClient(const GatewayConfig& config) : stack_(config) {}

  ApiResponse Call(const std::string& method, const std::string& path, const Query& query,
                   const std::string& body) override {
    return stack_.service().Handle(ApiRequest{method, path, query, body});
  }
  double poll_interval_s() const override { return 0.02; }
  bool must_wait() const override { return true; }

 private:
  Stack stack_;
};

class RemoteClient : public ApiClient {
 public:
  explicit RemoteClient(const std::string& url) : endpoint_(ParseEndpoint(url)) {}

  ApiResponse Call(const std::string& method, const std::string& path, const Query& query,
                   const std::string& body) override {
    httplib::Client client(endpoint_.host, endpoint_.port);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(120, 0);
    std::string target = path;
    if (!query.empty()) {
      httplib::Params params(query.begin(), query.end());
      target += "?" + httplib::detail::params_to_query_str(params);
    }
    httplib::Result res;
    if (method == "GET") {
      res = client.Get(target);
    } else if (method == "POST") {
      res = client.Post(target, body, "application/json");
    } else if (method == "PATCH") {
      res = client.Patch(target, body, "application/json");
    } else if (method == "DELETE") {
      res = client.Delete(target);
    } else {
      throw Error(ErrorCode::kInternal, "unsupported method " + method);
    }
    if (!res) {
      const std::string msg = "cannot reach " + endpoint_.host + ":" +
                              std::to_string(endpoint_.port) + " (" +
                              httplib::to_string(res.error()) + ")";
      return ApiResponse{503, "application/json",
                         ApiErrorBody(503, ErrorCodeName(ErrorCode::kUnavailable), msg).dump()};
    }
    return ApiResponse{res->status, res->get_header_value("Content-Type"), res->body};
  }
  double poll_interval_s() const override { return 0.2; }
  bool must_wait() const override { return false; }

 private:
  Endpoint endpoint_;
};

// Thrown to unwind with an API error already reported.
struct ApiFailure {
  int exit_code = kExitApi;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool json_output = false;
  std::unique_ptr<ApiClient> client;

  ApiResponse Call(const std::string& method, const std::string& path, const Query& query = {},
                   const std::string& body = "") {
    ApiResponse res = client->Call(method, "/api/v1" + path, query, body);
    if (res.status >= 400) {
      std::string code = "error", message = res.body;
      try {
        const json e = json::parse(res.body);
        code = e.value("code", code);
        message = e.value("message", message);
      } catch (const json::exception&) {
      }
      if (json_output) {
        err << res.body << "\n";
      } else {
        err << "error: " << code << ": " << message << "\n";
      }
      throw ApiFailure{};
    }
    return res;
  }

  json CallJson(const std::string& method, const std::string& path, const Query& query = {},
                const std::string& body = "") {
    return json::parse(Call(method, path, query, body).body);
  }
};

std::string Fmt(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_number_float()) {
    std::ostringstream s;
    s << std::setprecision(6) << v.get<double>();
    return s.str();
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileAtomically(const std::filesystem::path& path, const std::string& data) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    out << data;
  }
  std::filesystem::rename(tmp, path);
}

bool Terminal(const std::string& state) {
  return state == "succeeded" || state == "failed" || state == "cancelled";
}

json WaitForJob(Context& ctx, const std::string& id, double timeout_s) {
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
  while (true) {
    json job = ctx.CallJson("GET", "/jobs/" + id);
    if (Terminal(job.value("state", ""))) return job;
    if (std::chrono::steady_clock::now() > deadline) {
      ctx.err << "error: timeout: job " << id << " is still " << job.value("state", "") << "\n";
      throw ApiFailure{};
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(ctx.client->poll_interval_s()));
  }
}

void PrintJob(Context& ctx, const json& job) {
  if (ctx.json_output) {
    ctx.out << job.dump(2) << "\n";
    return;
  }
  ctx.out << "job " << job.at("job_id").get<std::string>() << " " << job.at("kind").get<std::string>()
          << " " << job.at("state").get<std::string>();
  if (!job["assigned_instance"].is_null()) ctx.out << " on " << Fmt(job["assigned_instance"]);
  ctx.out << "\n";
  if (!job["error"].is_null()) ctx.out << "error " << Fmt(job["error"]) << "\n";
  const json& result = job["result"];
  if (result.is_null()) return;
  if (!result["model_key"].is_null()) {
    ctx.out << "model " << Fmt(result["model_key"]) << "@" << Fmt(result["model_version"]) << "\n";
  }
  if (!result["report_key"].is_null()) {
    ctx.out << "report " << Fmt(result["report_key"]) << "@" << Fmt(result["report_version"])
            << "\n";
  }
  const json& m = result["metrics"];
  if (m.is_object() && m.contains("slot_f1")) {
    ctx.out << Fmt(m.value("eval_split", json("eval"))) << " intent_accuracy="
            << Fmt(m["intent_accuracy"]) << " slot_f1=" << Fmt(m["slot_f1"]) << "\n";
  }
  if (m.is_object() && m.contains("mean")) {
    ctx.out << "mean intent_accuracy=" << Fmt(m["mean"]["intent_accuracy"])
            << " slot_f1=" << Fmt(m["mean"]["slot_f1"]) << " selected_seed="
            << Fmt(m["selected_seed"]) << "\n";
  }
  if (m.is_object() && m.contains("grid")) {
    const json& grid = m["grid"];
    ctx.out << "best " << grid["best"].dump() << "\n";
    std::size_t i = 0;
    for (const auto& point : grid["leaderboard"]) {
      ctx.out << (i == grid.value("best_index", std::size_t{0}) ? "* " : "  ")
              << point["hyper"].dump() << " score=" << Fmt(point["score"]) << "\n";
      ++i;
    }
  }
}

// Submits a job and optionally waits. Returns the exit code.
int SubmitAndMaybeWait(Context& ctx, const ordered_json& body, bool wait, double timeout_s) {
  json job = ctx.CallJson("POST", "/jobs", {}, body.dump());
  const std::string id = job.at("job_id").get<std::string>();
  if (!wait && !ctx.client->must_wait()) {
    if (ctx.json_output) {
      ctx.out << job.dump(2) << "\n";
    } else {
      ctx.out << "job " << id << " " << job.value("state", "") << "\n";
    }
    return kExitOk;
  }
  job = WaitForJob(ctx, id, timeout_s);
  PrintJob(ctx, job);
  return job.value("state", "") == "succeeded" ? kExitOk : kExitApi;
}

// Blocks SIGINT/SIGTERM in every thread and stops `stop` when one arrives.
class SignalStopper {
 public:
  explicit SignalStopper(std::function<void()> stop) {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set_, nullptr);
    thread_ = std::thread([this, stop = std::move(stop)] {
      int sig = 0;
      sigwait(&set_, &sig);
      stop();
    });
  }
  ~SignalStopper() {
    // Wakes the waiter if the server stopped on its own.
    pthread_kill(thread_.native_handle(), SIGTERM);
    thread_.join();
  }

 private:
  sigset_t set_;
  std::thread thread_;
};

struct Options {
  std::string api;
  std::string store_root;
  std::string config;
  bool json_output = false;

  // serve / worker
  std::string host;
  int port = -1;
  std::string port_file;
  std::string provider;
  std::string instance_id = "worker";
  int slots = 1;

  // datasets
  std::string format = "conll";
  std::string in;
  std::string out;
  std::string name;
  std::string version;

  // jobs
  std::string corpus;
  std::string corpus_version;
  std::string model;
  std::string model_version;
  std::string target;
  std::string owner;
  std::string idempotency_key;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<int> window;
  std::optional<int> prefix_suffix;
  bool fast = false;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> grid;
  std::string metric = "mean";
  bool wait = false;
  double timeout_s = 600.0;
  std::string job_id;
  std::string state;

  // instances
  int cpu_cores = 4;
  int memory_gb = 8;
  int gpu_count = 1;
  std::string gpu_model = "NVIDIA V100";
  std::string reserved_by;
  bool pinned = false;

  // reports
  std::string key;
  std::string level = "intent";
  std::string gold;
  std::string pred;
  std::string cursor;
};

GatewayConfig ResolveConfig(const Options& o) {
  std::optional<std::filesystem::path> file;
  if (!o.config.empty()) file = o.config;
  GatewayConfig config = LoadGatewayConfig(file, NluforgeEnvironment());
  if (!o.store_root.empty()) config.store_root = o.store_root;
  if (!o.provider.empty()) config.provider = o.provider;
  if (o.port >= 0) config.port = o.port;
  if (!o.host.empty()) config.host = o.host;
  return config;
}

int Serve(Context& ctx, const Options& o) {
  GatewayConfig config = ResolveConfig(o);
  std::unique_ptr<Stack> stack;
  try {
    stack = std::make_unique<Stack>(config);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kIo) throw;
    ctx.err << ApiErrorBody(500, "store_unwritable", e.what()).dump() << "\n";
    return kExitApi;
  }
  GatewayServer server(stack->service(), config.ui_dir);
  const int port = server.Bind(config.host, config.port);
  if (!o.port_file.empty()) WriteFileAtomically(o.port_file, std::to_string(port) + "\n");
  ctx.out << "listening on http://" << config.host << ":" << port << std::endl;
  {
    SignalStopper stopper([&server] { server.Stop(); });
    server.Listen();
  }
  stack.reset();
  return kExitOk;
}

int RunWorker(Context& ctx, const Options& o) {
  GatewayConfig config = ResolveConfig(o);
  FilesystemStore store(config.store_root);
  WorkerOptions options;
  options.instance_id = o.instance_id;
  options.capacity_slots = o.slots;
  Worker worker(store, options);
  WorkerServer server(worker);
  const std::string host = o.host.empty() ? "127.0.0.1" : o.host;
  const int port = server.Bind(host, o.port < 0 ? 0 : o.port);
  if (!o.port_file.empty()) WriteFileAtomically(o.port_file, std::to_string(port) + "\n");
  ctx.out << "worker " << o.instance_id << " listening on http://" << host << ":" << port
          << std::endl;
  SignalStopper stopper([&server] { server.Stop(); });
  server.Listen();
  return kExitOk;
}

ordered_json HyperJson(const Options& o) {
  Hyperparams h = o.fast ? FastPreset() : Hyperparams{};
  if (o.epochs) h.epochs = *o.epochs;
  if (o.seed) h.seed = *o.seed;
  if (o.window) h.feature_window = *o.window;
  if (o.prefix_suffix) h.use_prefix_suffix = *o.prefix_suffix != 0;
  ValidateHyperparams(h);
  return HyperparamsToJson(h);
}

ordered_json JobBody(const Options& o, std::string_view kind) {
  ordered_json body;
  body["kind"] = kind;
  body["corpus_key"] = o.corpus;
  if (!o.corpus_version.empty()) body["corpus_version"] = o.corpus_version;
  if (!o.model.empty()) body["model_key"] = o.model;
  if (!o.model_version.empty()) body["model_version"] = o.model_version;
  if (!o.target.empty()) body["target_instance"] = o.target;
  if (!o.owner.empty()) body["owner"] = o.owner;
  if (!o.idempotency_key.empty()) body["idempotency_key"] = o.idempotency_key;
  return body;
}

Query VersionQuery(const Options& o) {
  Query q;
  if (!o.version.empty()) q["version"] = o.version;
  return q;
}

void PrintList(Context& ctx, const json& page, const std::function<void(const json&)>& row) {
  if (ctx.json_output) {
    ctx.out << page.dump(2) << "\n";
    return;
  }
  for (const auto& item : page["items"]) row(item);
  if (!page["next_cursor"].is_null()) ctx.out << "next cursor " << Fmt(page["next_cursor"]) << "\n";
}

}  // namespace

int RunCli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nluforge: dataset conversion, joint NLU training and a scheduled worker pool"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--api", o.api, "Gateway URL; without it commands run against a local stack");
  app.add_option("--store-root", o.store_root, "Artifact store root (local mode, serve, worker)");
  app.add_option("--config", o.config, "Gateway config JSON");
  app.add_flag("--json", o.json_output, "Machine-readable output");

  auto* serve = app.add_subcommand("serve", "Run the REST gateway with its scheduler");
  serve->add_option("--host", o.host);
  serve->add_option("--port", o.port);
  serve->add_option("--port-file", o.port_file, "Write the bound port here");
  serve->add_option("--provider", o.provider)->check(CLI::IsMember({"simulated", "subprocess"}));

  auto* worker = app.add_subcommand("worker", "Run one worker instance");
  worker->add_option("--host", o.host);
  worker->add_option("--port", o.port);
  worker->add_option("--port-file", o.port_file);
  worker->add_option("--instance-id", o.instance_id);
  worker->add_option("--slots", o.slots)->check(CLI::PositiveNumber);

  auto* dataset = app.add_subcommand("dataset", "Import, export and validate datasets");
  dataset->require_subcommand(1);
  auto* ds_import = dataset->add_subcommand("import");
  ds_import->add_option("--format", o.format)
      ->check(CLI::IsMember({"conll", "intent_json", "keyphrase_jsonl", "ir"}));
  ds_import->add_option("--in", o.in)->required();
  ds_import->add_option("--name", o.name)->required();
  auto* ds_export = dataset->add_subcommand("export");
  ds_export->add_option("--name", o.name)->required();
  ds_export->add_option("--format", o.format)->check(CLI::IsMember({"conll", "intent_json", "ir"}));
  ds_export->add_option("--version", o.version);
  ds_export->add_option("--out", o.out, "Output file (default stdout)");
  auto* ds_validate = dataset->add_subcommand("validate");
  ds_validate->add_option("--name", o.name)->required();
  ds_validate->add_option("--version", o.version);
  auto* ds_list = dataset->add_subcommand("list");

  auto add_job_options = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", o.corpus, "Dataset name")->required();
    cmd->add_option("--corpus-version", o.corpus_version);
    cmd->add_option("--target", o.target, "Run on this instance only");
    cmd->add_option("--owner", o.owner, "Matched against instance reservations");
    cmd->add_option("--idempotency-key", o.idempotency_key);
    cmd->add_flag("--wait", o.wait, "Block until the job is terminal");
    cmd->add_option("--timeout", o.timeout_s, "Seconds to wait");
  };
  auto add_hyper_options = [&](CLI::App* cmd) {
    cmd->add_option("--epochs", o.epochs);
    cmd->add_option("--seed", o.seed);
    cmd->add_option("--window", o.window);
    cmd->add_option("--prefix-suffix", o.prefix_suffix)->check(CLI::Range(0, 1));
    cmd->add_flag("--fast", o.fast, "Start from the fast preset");
    cmd->add_option("--metric", o.metric)
        ->check(CLI::IsMember({"intent_accuracy", "slot_f1", "mean"}));
  };

  auto* train = app.add_subcommand("train", "Train a joint model");
  add_job_options(train);
  add_hyper_options(train);
  train->add_option("--model", o.model, "Model name (default: the job id)");
  train->add_option("--seeds", o.seeds, "Train one model per seed, keep the median")
      ->delimiter(',');

  auto* test = app.add_subcommand("test", "Evaluate a stored model on a test split");
  add_job_options(test);
  test->add_option("--model", o.model)->required();
  test->add_option("--model-version", o.model_version);

  auto* grid = app.add_subcommand("gridsearch", "Grid search over hyperparameters");
  add_job_options(grid);
  add_hyper_options(grid);
  grid->add_option("--grid", o.grid, "name=v1,v2 (repeatable)")->required();
  grid->add_option("--model", o.model);

  auto* jobs = app.add_subcommand("jobs", "List, inspect, wait for or cancel jobs");
  jobs->require_subcommand(0, 1);
  jobs->add_option("--state", o.state);
  jobs->add_option("--cursor", o.cursor);
  auto* jobs_show = jobs->add_subcommand("show");
  jobs_show->add_option("id", o.job_id)->required();
  auto* jobs_wait = jobs->add_subcommand("wait");
  jobs_wait->add_option("id", o.job_id)->required();
  jobs_wait->add_option("--timeout", o.timeout_s);
  auto* jobs_cancel = jobs->add_subcommand("cancel");
  jobs_cancel->add_option("id", o.job_id)->required();
  auto* jobs_logs = jobs->add_subcommand("logs");
  jobs_logs->add_option("id", o.job_id)->required();

  auto* instances = app.add_subcommand("instances", "Manage worker instances");
  instances->require_subcommand(0, 1);
  auto* inst_create = instances->add_subcommand("create");
  inst_create->add_option("--slots", o.slots)->check(CLI::PositiveNumber);
  inst_create->add_option("--cpu-cores", o.cpu_cores);
  inst_create->add_option("--memory-gb", o.memory_gb);
  inst_create->add_option("--gpus", o.gpu_count);
  inst_create->add_option("--gpu-model", o.gpu_model);
  inst_create->add_option("--reserved-by", o.reserved_by);
  inst_create->add_flag("--pinned", o.pinned, "Exempt from scale-down");
  auto* inst_stop = instances->add_subcommand("stop");
  inst_stop->add_option("id", o.job_id)->required();

  auto* models = app.add_subcommand("models", "List and download trained models");
  models->require_subcommand(1);
  auto* models_list = models->add_subcommand("list");
  auto* models_download = models->add_subcommand("download");
  models_download->add_option("--name", o.name)->required();
  models_download->add_option("--version", o.version);
  models_download->add_option("--out", o.out)->required();

  auto* reports = app.add_subcommand("reports", "Inspect evaluation reports");
  reports->require_subcommand(1);
  auto* rep_show = reports->add_subcommand("show");
  rep_show->add_option("key", o.key)->required();
  auto* rep_conf = reports->add_subcommand("confusion");
  rep_conf->add_option("key", o.key)->required();
  rep_conf->add_option("--level", o.level)->check(CLI::IsMember({"intent", "token_label"}));
  auto* rep_cell = reports->add_subcommand("cell");
  rep_cell->add_option("key", o.key)->required();
  rep_cell->add_option("--level", o.level)->check(CLI::IsMember({"intent", "token_label"}));
  rep_cell->add_option("--gold", o.gold)->required();
  rep_cell->add_option("--pred", o.pred)->required();
  rep_cell->add_option("--cursor", o.cursor);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Context ctx{out, err, o.json_output, nullptr};
  try {
    if (serve->parsed()) return Serve(ctx, o);
    if (worker->parsed()) return RunWorker(ctx, o);

    if (!o.api.empty()) {
      ctx.client = std::make_unique<RemoteClient>(o.api);
    } else {
      GatewayConfig config = ResolveConfig(o);
      config.tick_period_s = 0.02;
      ctx.client = std::make_unique<LocalClient>(config);
    }

    if (ds_import->parsed()) {
      ordered_json body;
      body["format"] = o.format;
      body["name"] = o.name;
      body["payload"] = ReadFile(o.in);
      json res = ctx.CallJson("POST", "/datasets", {}, body.dump());
      if (ctx.json_output) {
        out << res.dump(2) << "\n";
      } else {
        out << "corpus " << Fmt(res["name"]) << " version " << Fmt(res["version"]) << "\n";
        out << Fmt(res["n_utterances"]) << " utterances, "
            << res["report"]["dropped"].size() << " dropped, "
            << res["report"]["issues"].size() << " issues\n";
      }
      return kExitOk;
    }
    if (ds_export->parsed()) {
      Query q = VersionQuery(o);
      q["format"] = o.format;
      const ApiResponse res = ctx.Call("GET", "/datasets/" + o.name + "/export", q);
      if (o.out.empty()) {
        out << res.body;
      } else {
        WriteFileAtomically(o.out, res.body);
      }
      return kExitOk;
    }
    if (ds_validate->parsed()) {
      json res = ctx.CallJson("POST", "/datasets/" + o.name + "/validate", VersionQuery(o));
      if (ctx.json_output) {
        out << res.dump(2) << "\n";
      } else {
        out << (res["ok"].get<bool>() ? "ok" : "invalid") << " " << Fmt(res["version"]) << "\n";
        for (const auto& i : res["issues"]) {
          out << Fmt(i["severity"]) << " " << Fmt(i["code"]) << " " << Fmt(i["utterance_id"])
              << ": " << Fmt(i["message"]) << "\n";
        }
      }
      return kExitOk;
    }
    if (ds_list->parsed()) {
      PrintList(ctx, ctx.CallJson("GET", "/datasets"), [&](const json& d) {
        out << Fmt(d["name"]) << " " << Fmt(d["latest_version"]) << "\n";
      });
      return kExitOk;
    }
    if (train->parsed()) {
      ordered_json body = JobBody(o, "train");
      body["hyper"] = HyperJson(o);
      body["metric"] = o.metric;
      body["seeds"] = o.seeds;
      return SubmitAndMaybeWait(ctx, body, o.wait, o.timeout_s);
    }
    if (test->parsed()) {
      return SubmitAndMaybeWait(ctx, JobBody(o, "test"), o.wait, o.timeout_s);
    }
    if (grid->parsed()) {
      HyperGrid hyper_grid;
      for (const auto& axis : o.grid) AddGridAxis(hyper_grid, axis);
      ordered_json body = JobBody(o, "grid_search");
      body["hyper"] = HyperJson(o);
      ordered_json g = ordered_json::object();
      for (const auto& [k, v] : hyper_grid) g[k] = v;
      body["grid"] = std::move(g);
      body["metric"] = o.metric;
      return SubmitAndMaybeWait(ctx, body, o.wait, o.timeout_s);
    }
    if (jobs_show->parsed()) {
      PrintJob(ctx, ctx.CallJson("GET", "/jobs/" + o.job_id));
      return kExitOk;
    }
    if (jobs_wait->parsed()) {
      const json job = WaitForJob(ctx, o.job_id, o.timeout_s);
      PrintJob(ctx, job);
      return job.value("state", "") == "succeeded" ? kExitOk : kExitApi;
    }
    if (jobs_cancel->parsed()) {
      PrintJob(ctx, ctx.CallJson("POST", "/jobs/" + o.job_id + "/cancel"));
      return kExitOk;
    }
    if (jobs_logs->parsed()) {
      out << ctx.Call("GET", "/jobs/" + o.job_id + "/logs").body;
      return kExitOk;
    }
    if (jobs->parsed()) {
      Query q;
      if (!o.state.empty()) q["state"] = o.state;
      if (!o.cursor.empty()) q["cursor"] = o.cursor;
      PrintList(ctx, ctx.CallJson("GET", "/jobs", q), [&](const json& j) {
        out << Fmt(j["job_id"]) << " " << Fmt(j["kind"]) << " " << Fmt(j["state"]) << " "
            << Fmt(j["assigned_instance"]) << "\n";
      });
      return kExitOk;
    }
    auto print_instance = [&](const json& i) {
      out << Fmt(i["instance_id"]) << " " << Fmt(i["state"]) << " slots "
          << Fmt(i["free_slots"]) << "/" << Fmt(i["capacity_slots"]) << " "
          << Fmt(i["endpoint"]) << "\n";
    };
    if (inst_create->parsed()) {
      ordered_json body;
      body["capacity_slots"] = o.slots;
      body["hardware"] = {{"cpu_cores", o.cpu_cores},
                          {"memory_gb", o.memory_gb},
                          {"gpu_count", o.gpu_count},
                          {"gpu_model", o.gpu_model}};
      if (!o.reserved_by.empty()) body["reserved_by"] = o.reserved_by;
      body["pinned"] = o.pinned;
      json res = ctx.CallJson("POST", "/instances", {}, body.dump());
      if (ctx.json_output) {
        out << res.dump(2) << "\n";
      } else {
        print_instance(res);
      }
      return kExitOk;
    }
    if (inst_stop->parsed()) {
      json res = ctx.CallJson("DELETE", "/instances/" + o.job_id);
      if (ctx.json_output) {
        out << res.dump(2) << "\n";
      } else {
        print_instance(res);
      }
      return kExitOk;
    }
    if (instances->parsed()) {
      PrintList(ctx, ctx.CallJson("GET", "/instances"), print_instance);
      return kExitOk;
    }
    if (models_list->parsed()) {
      PrintList(ctx, ctx.CallJson("GET", "/models"), [&](const json& m) {
        out << Fmt(m["key"]) << " " << Fmt(m["latest_version"]) << "\n";
      });
      return kExitOk;
    }
    if (models_download->parsed()) {
      const ApiResponse res = ctx.Call("GET", "/models/" + o.name + "/download", VersionQuery(o));
      WriteFileAtomically(o.out, res.body);
      if (!ctx.json_output) out << "wrote " << res.body.size() << " bytes to " << o.out << "\n";
      return kExitOk;
    }
    if (rep_show->parsed()) {
      json res = ctx.CallJson("GET", "/reports/" + o.key);
      if (ctx.json_output) {
        out << res.dump(2) << "\n";
      } else {
        const json& r = res["report"];
        out << Fmt(res["key"]) << "@" << Fmt(res["version"]) << " split " << Fmt(r["split"]) << "\n"
            << "intent_accuracy " << Fmt(r["intent_accuracy"]) << "\n"
            << "slot_precision " << Fmt(r["slot_precision"]) << " slot_recall "
            << Fmt(r["slot_recall"]) << " slot_f1 " << Fmt(r["slot_f1"]) << "\n";
      }
      return kExitOk;
    }
    if (rep_conf->parsed()) {
      json res = ctx.CallJson("GET", "/reports/" + o.key + "/confusion", {{"level", o.level}});
      if (ctx.json_output) {
        out << res.dump(2) << "\n";
      } else {
        for (const auto& c : res["cells"]) {
          out << Fmt(c["gold"]) << " -> " << Fmt(c["pred"]) << " " << Fmt(c["count"]) << "\n";
        }
      }
      return kExitOk;
    }
    if (rep_cell->parsed()) {
      Query q{{"level", o.level}, {"gold", o.gold}, {"pred", o.pred}};
      if (!o.cursor.empty()) q["cursor"] = o.cursor;
      PrintList(ctx, ctx.CallJson("GET", "/reports/" + o.key + "/confusion/cell", q),
                [&](const json& i) {
                  out << Fmt(i["utterance_id"]) << " " << Fmt(i["rendered_text"]) << "\n";
                });
      return kExitOk;
    }
  } catch (const ApiFailure& f) {
    return f.exit_code;
  } catch (const Error& e) {
    if (ctx.json_output) {
      err << ApiErrorBody(HttpStatusFor(e.code()), ErrorCodeName(e.code()), e.what()).dump()
          << "\n";
    } else {
      err << "error: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    }
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitApi;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kExitApi;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace nluforge
