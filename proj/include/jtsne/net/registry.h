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

#ifndef JTSNE_NET_REGISTRY_H_
#define JTSNE_NET_REGISTRY_H_

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/protocol/types.h"
#include "json.hpp"

namespace jtsne::net {

enum class Lifecycle { kPreparing, kRunning, kComplete, kFailed };
enum class ParticipantState { kInvited, kJoined, kUploaded };
enum class Role { kS, kT, kP };

std::string LifecycleName(Lifecycle s);
std::string ParticipantStateName(ParticipantState s);
std::string RoleName(Role r);
absl::StatusOr<Role> ParseRole(std::string_view name);
// Owner of each protocol step: S has 1, 4, 7; T has 3, 5, 6, 8; P has 2.
Role StepOwner(int step);

struct RosterEntry {
  std::string id;
  size_t count = 0;
  ParticipantState state = ParticipantState::kInvited;
  std::string endpoint;
  bool reported_upload = false;  // step 2 done for this participant
};

struct HistoryEntry {
  std::string status;  // "Preparing", "Running(3)", ...
  int64_t at_ms = 0;
  nlohmann::json evidence;
};

struct TaskRecord {
  std::string task_id;
  std::string title;
  std::string description;
  std::string proposer;
  protocol::TaskConfig config;
  std::vector<RosterEntry> roster;
  std::string s_endpoint;
  std::string t_endpoint;
  Lifecycle state = Lifecycle::kPreparing;
  int step = 0;  // current step while Running
  std::string failure;
  std::string result_ref;
  int64_t created_ms = 0;
  int64_t updated_ms = 0;
  int64_t step_started_ms = 0;
  std::vector<HistoryEntry> history;

  // "Preparing", "Running(k)", "Complete" or "Failed".
  std::string Status() const;
  const RosterEntry* FindParticipant(std::string_view id) const;
  nlohmann::json ToJson() const;
  static absl::StatusOr<TaskRecord> FromJson(const nlohmann::json& j);
};

struct RegistryOptions {
  // Append-only JSON-lines journal; empty keeps everything in memory.
  std::string journal_path;
  std::chrono::milliseconds step_base_deadline{60000};
  // Extra deadline per pair of points, scaled by (key_bits / 1024)^2.
  double step_ms_per_pair = 2.0;
};

// Task metadata and lifecycle. Mutations of one task are serialized;
// reads return immutable snapshots without taking the task lock.
class TaskRegistry {
 public:
  explicit TaskRegistry(RegistryOptions options = {});

  // Replays a journal written by an earlier registry.
  absl::Status Replay(const std::string& path);

  absl::StatusOr<TaskRecord> Propose(protocol::TaskConfig config,
                                     std::string proposer);
  std::vector<std::shared_ptr<const TaskRecord>> List() const;
  absl::StatusOr<std::shared_ptr<const TaskRecord>> Get(
      const std::string& task_id) const;

  absl::StatusOr<TaskRecord> Join(const std::string& task_id,
                                  const std::string& participant,
                                  const std::string& endpoint);
  // The participant has loaded and checked its data and is ready to upload.
  absl::StatusOr<TaskRecord> MarkUploaded(const std::string& task_id,
                                          const std::string& participant);
  // Second claimant for a role gets AlreadyExists. `token_key` is kept in
  // memory only and signs artifact access tokens for T.
  absl::StatusOr<TaskRecord> ClaimCollaborator(const std::string& task_id,
                                               Role role,
                                               const std::string& endpoint,
                                               const std::string& token_key);
  // Reports completion of `step`. Role mismatches are rejected without a
  // state change; an out-of-order step fails the task.
  absl::StatusOr<TaskRecord> Advance(const std::string& task_id, Role role,
                                     int step, const std::string& participant,
                                     const std::string& result_ref,
                                     nlohmann::json evidence = nullptr);
  absl::StatusOr<TaskRecord> Fail(const std::string& task_id,
                                  const std::string& reason);
  // Fails running tasks whose current step outlived its deadline.
  std::vector<std::string> CheckDeadlines(int64_t now_ms);
  std::chrono::milliseconds StepDeadline(const TaskRecord& r) const;

  // Access token for `viewer` to fetch `kind` from T.
  absl::StatusOr<std::string> IssueToken(const std::string& task_id,
                                         const std::string& viewer,
                                         const std::string& kind) const;

 private:
  struct Slot {
    std::mutex mu;
    std::shared_ptr<const TaskRecord> snapshot;
    std::string token_key;
  };

  std::shared_ptr<Slot> Find(const std::string& task_id) const;
  template <typename Fn>
  absl::StatusOr<TaskRecord> Mutate(const std::string& task_id,
                                    const std::string& event, Fn&& fn);
  void Journal(const std::string& event, const TaskRecord& r);

  RegistryOptions options_;
  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::shared_ptr<Slot>> tasks_;
  std::mutex journal_mu_;
  std::ofstream journal_;
};

int64_t NowMs();

}  // namespace jtsne::net

#endif  // JTSNE_NET_REGISTRY_H_
