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

#ifndef JTSNE_NET_RUNNERS_H_
#define JTSNE_NET_RUNNERS_H_

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/aggregate/artifact.h"
#include "jtsne/ahe/paillier.h"
#include "jtsne/net/coordinator.h"
#include "jtsne/net/node.h"
#include "jtsne/net/registry.h"
#include "jtsne/protocol/roles.h"

namespace jtsne::net {

struct NodeOptions {
  std::string coordinator_url;
  Endpoint listen{"127.0.0.1", 0};
  // Upper bound on waiting for a lifecycle step or a peer's message.
  std::chrono::milliseconds step_timeout{std::chrono::minutes(30)};
  bool audit = false;
  // S: reuse this key pair instead of generating one.
  std::optional<ahe::KeyPair> keys;
  // T: deterministic noise and permutation.
  std::optional<uint64_t> noise_seed;
  protocol::FaultInjection faults;
};

// Collaborator S or T. Holds one frame server for all of its tasks; T also
// answers token-checked artifact requests relayed by the coordinator.
class CollaboratorNode {
 public:
  CollaboratorNode(Role role, NodeOptions options);
  ~CollaboratorNode();

  absl::Status Start();
  void Stop();
  const Endpoint& endpoint() const { return server_.endpoint(); }

  // Claims the role for `task_id` and runs this role's steps to the end.
  absl::Status RunTask(const std::string& task_id);
  // Polls for Preparing tasks with this role unclaimed, claims them and
  // runs each on its own thread. Returns after `max_tasks` tasks finished
  // (0 = never) or when `stop` is set.
  absl::Status Serve(const std::atomic<bool>& stop, size_t max_tasks = 0);

  // Finished role state, for audits and tests.
  std::shared_ptr<const protocol::CollaboratorS> s_state(const std::string& task_id) const;
  std::shared_ptr<const protocol::CollaboratorT> t_state(const std::string& task_id) const;

 private:
  absl::Status RunClaimed(const std::string& task_id);
  absl::Status RunS(const std::string& task_id);
  absl::Status RunT(const std::string& task_id);
  std::optional<Frame> HandleRequest(const Frame& frame);

  Role role_;
  NodeOptions options_;
  CoordinatorClient client_;
  FrameServer server_;
  PeerPool peers_;
  std::string token_key_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const protocol::CollaboratorS>> s_done_;
  std::map<std::string, std::shared_ptr<const protocol::CollaboratorT>> t_done_;
};

struct ParticipantOutcome {
  // The participant's view with its own attributes attached.
  aggregate::EmbeddingArtifact view;
  nlohmann::json density;
  protocol::ViewTranscript transcript{"", false};
};

// Joins `task_id` with `data`, uploads at step 2 and fetches the result.
absl::StatusOr<ParticipantOutcome> RunParticipant(const std::string& task_id,
                                                  const protocol::Dataset& data,
                                                  const NodeOptions& options);

}  // namespace jtsne::net

#endif  // JTSNE_NET_RUNNERS_H_
