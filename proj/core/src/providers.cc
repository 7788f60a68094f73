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

#include "nluforge/providers.h"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <thread>
#include <vector>

#include "nluforge/error.h"
#include "nluforge/http_worker.h"

extern char** environ;

namespace nluforge {
namespace {

// SIGTERM, then SIGKILL if the child lingers.
void Terminate(pid_t pid) {
  ::kill(pid, SIGTERM);
  for (int i = 0; i < 100; ++i) {
    if (::waitpid(pid, nullptr, WNOHANG) == pid) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ::kill(pid, SIGKILL);
  ::waitpid(pid, nullptr, 0);
}

}  // namespace

std::filesystem::path CurrentExecutable() {
  std::error_code ec;
  auto path = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (ec) throw Error(ErrorCode::kInternal, "cannot resolve /proc/self/exe");
  return path;
}

SubprocessProvider::SubprocessProvider(SubprocessOptions options) : options_(std::move(options)) {
  if (options_.worker_binary.empty()) options_.worker_binary = CurrentExecutable();
  if (options_.run_dir.empty()) options_.run_dir = options_.store_root / ".run";
  std::filesystem::create_directories(options_.run_dir);
}

std::unique_ptr<WorkerHandle> SubprocessProvider::Start(const std::string& instance_id,
                                                        const InstanceConfig& config) {
  const auto port_file = options_.run_dir / (instance_id + ".port");
  const auto log_file = options_.run_dir / (instance_id + ".log");
  std::filesystem::remove(port_file);

  std::vector<std::string> args = {options_.worker_binary.string(),
                                   "--store-root",
                                   options_.store_root.string(),
                                   "worker",
                                   "--host",
                                   "127.0.0.1",
                                   "--port",
                                   "0",
                                   "--port-file",
                                   port_file.string(),
                                   "--instance-id",
                                   instance_id,
                                   "--slots",
                                   std::to_string(config.capacity_slots)};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log_file.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  // The caller may block signals for a sigwait thread; children start clean.
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  sigset_t none;
  sigemptyset(&none);
  posix_spawnattr_setsigmask(&attr, &none);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSIGMASK);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, argv[0], &actions, &attr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    throw Error(ErrorCode::kUnavailable,
                "cannot spawn worker " + options_.worker_binary.string() + ": " +
                    std::to_string(rc));
  }

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(options_.start_timeout_s);
  int port = 0;
  while (std::chrono::steady_clock::now() < deadline) {
    if (::waitpid(pid, nullptr, WNOHANG) == pid) {
      throw Error(ErrorCode::kUnavailable,
                  "worker " + instance_id + " exited during startup; see " + log_file.string());
    }
    std::ifstream in(port_file);
    if (in >> port && port > 0) break;
    port = 0;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  if (port == 0) {
    Terminate(pid);
    throw Error(ErrorCode::kUnavailable, "worker " + instance_id + " did not start in time");
  }
  return std::make_unique<HttpWorkerHandle>("127.0.0.1", port, [pid] { Terminate(pid); });
}

}  // namespace nluforge
