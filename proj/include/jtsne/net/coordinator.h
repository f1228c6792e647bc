/*
 * Copyright 2026 The jtsne Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef JTSNE_NET_COORDINATOR_H_
#define JTSNE_NET_COORDINATOR_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <memory>
#include <string>
#include <thread>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "jtsne/net/registry.h"
#include "jtsne/net/socket.h"
#include "json.hpp"

namespace httplib {
class Server;
}  // namespace httplib

namespace jtsne::net {

int HttpStatusFor(const absl::Status& status);
absl::Status StatusFromHttp(int http_status, const std::string& body);
// {"error": {"code": ..., "message": ...}}
nlohmann::json ErrorJson(const absl::Status& status);

struct CoordinatorOptions {
  RegistryOptions registry;
  std::chrono::milliseconds deadline_check_interval{1000};
  std::chrono::milliseconds artifact_timeout{30000};
};

// HTTP control plane. Holds task metadata only; bulk data flows between
// the roles directly.
//
//   GET  /tasks                      list
//   POST /tasks                      propose {config, proposer}
//   GET  /tasks/{id}                 record
//   POST /tasks/{id}/join            {participant_id, endpoint}
//   POST /tasks/{id}/ready           {participant_id}
//   POST /tasks/{id}/collaborators   {role, endpoint, token_key}
//   POST /tasks/{id}/advance         {role, step, participant_id, result_ref}
//   POST /tasks/{id}/fail            {reason}
//   GET  /tasks/{id}/artifact?participant=  view fetched from T
//   GET  /tasks/{id}/density?participant=   rasters and grid counts
class CoordinatorServer {
 public:
  explicit CoordinatorServer(CoordinatorOptions options = {});
  ~CoordinatorServer();

  // Port 0 picks a free port.
  absl::Status Start(const Endpoint& at);
  void Stop();
  // Blocks until Stop() is called from another thread or a signal handler.
  void Wait();

  const Endpoint& endpoint() const { return endpoint_; }
  std::string url() const { return "http://" + endpoint_.ToString(); }
  TaskRegistry& registry() { return registry_; }

 private:
  void Routes();
  absl::StatusOr<std::string> FetchFromT(const std::string& task_id,
                                         const std::string& viewer,
                                         const std::string& kind);

  CoordinatorOptions options_;
  TaskRegistry registry_;
  std::unique_ptr<httplib::Server> http_;
  Endpoint endpoint_;
  std::thread serve_thread_;
  std::thread ticker_;
  std::atomic<bool> stopping_{false};
  std::mutex tick_mu_;
  std::condition_variable tick_cv_;
};

// Typed client for the coordinator's HTTP surface.
class CoordinatorClient {
 public:
  explicit CoordinatorClient(std::string url,
                             std::chrono::milliseconds timeout = std::chrono::milliseconds(60000));

  absl::StatusOr<nlohmann::json> ListTasks();
  absl::StatusOr<nlohmann::json> Propose(const nlohmann::json& config,
                                         const std::string& proposer);
  absl::StatusOr<nlohmann::json> GetTask(const std::string& id);
  absl::StatusOr<nlohmann::json> Join(const std::string& id,
                                      const std::string& participant,
                                      const std::string& endpoint);
  absl::StatusOr<nlohmann::json> Ready(const std::string& id,
                                       const std::string& participant);
  absl::StatusOr<nlohmann::json> Claim(const std::string& id, Role role,
                                       const std::string& endpoint,
                                       const std::string& token_key);
  absl::StatusOr<nlohmann::json> Advance(const std::string& id, Role role,
                                         int step,
                                         const std::string& participant = "",
                                         const std::string& result_ref = "",
                                         const nlohmann::json& evidence = nullptr);
  absl::StatusOr<nlohmann::json> Fail(const std::string& id,
                                      const std::string& reason);
  absl::StatusOr<nlohmann::json> Artifact(const std::string& id,
                                          const std::string& participant);
  absl::StatusOr<nlohmann::json> Density(const std::string& id,
                                         const std::string& participant);

  // Polls until the task reaches Running(step), or Complete when step is 9.
  // A Failed task or a task already past `step` is an error.
  absl::StatusOr<nlohmann::json> WaitForStep(const std::string& id, int step,
                                             std::chrono::milliseconds timeout);

  const std::string& url() const { return url_; }

 private:
  absl::StatusOr<nlohmann::json> Call(const std::string& method,
                                      const std::string& path,
                                      const nlohmann::json& body = nullptr);

  std::string url_;
  std::chrono::milliseconds timeout_;
};

}  // namespace jtsne::net

#endif  // JTSNE_NET_COORDINATOR_H_
