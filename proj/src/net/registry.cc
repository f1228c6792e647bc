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

#include "jtsne/net/registry.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/common/status_macros.h"
#include "jtsne/net/token.h"

namespace jtsne::net {

namespace {

using nlohmann::json;

constexpr const char* kParticipantStates[] = {"invited", "joined", "uploaded"};

absl::StatusOr<ParticipantState> ParseParticipantState(const std::string& s) {
  for (int i = 0; i < 3; ++i) {
    if (s == kParticipantStates[i]) return static_cast<ParticipantState>(i);
  }
  return absl::InvalidArgumentError(absl::StrCat("bad participant state ", s));
}

absl::StatusOr<Lifecycle> ParseLifecycle(const std::string& s) {
  for (Lifecycle l : {Lifecycle::kPreparing, Lifecycle::kRunning,
                      Lifecycle::kComplete, Lifecycle::kFailed}) {
    if (LifecycleName(l) == s) return l;
  }
  return absl::InvalidArgumentError(absl::StrCat("bad lifecycle state ", s));
}

void Transition(TaskRecord& r, Lifecycle state, int step, json evidence,
                int64_t now) {
  r.state = state;
  r.step = state == Lifecycle::kRunning ? step : r.step;
  r.step_started_ms = now;
  r.history.push_back({r.Status(), now, std::move(evidence)});
}

// Starts the task once every participant has uploaded and both
// collaborators are known.
void MaybeStart(TaskRecord& r, int64_t now) {
  if (r.state != Lifecycle::kPreparing) return;
  if (r.s_endpoint.empty() || r.t_endpoint.empty()) return;
  for (const auto& p : r.roster) {
    if (p.state != ParticipantState::kUploaded) return;
  }
  Transition(r, Lifecycle::kRunning, 1, nullptr, now);
}

}  // namespace

int64_t NowMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string LifecycleName(Lifecycle s) {
  switch (s) {
    case Lifecycle::kPreparing:
      return "Preparing";
    case Lifecycle::kRunning:
      return "Running";
    case Lifecycle::kComplete:
      return "Complete";
    case Lifecycle::kFailed:
      return "Failed";
  }
  return "?";
}

std::string ParticipantStateName(ParticipantState s) {
  return kParticipantStates[static_cast<int>(s)];
}

std::string RoleName(Role r) {
  switch (r) {
    case Role::kS:
      return "S";
    case Role::kT:
      return "T";
    case Role::kP:
      return "P";
  }
  return "?";
}

absl::StatusOr<Role> ParseRole(std::string_view name) {
  if (name == "S" || name == "collab-s") return Role::kS;
  if (name == "T" || name == "collab-t") return Role::kT;
  if (name == "P" || name == "participant") return Role::kP;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown role '", std::string(name), "'"));
}

Role StepOwner(int step) {
  switch (step) {
    case 1:
    case 4:
    case 7:
      return Role::kS;
    case 2:
      return Role::kP;
    default:
      return Role::kT;
  }
}

std::string TaskRecord::Status() const {
  if (state == Lifecycle::kRunning) return absl::StrCat("Running(", step, ")");
  return LifecycleName(state);
}

const RosterEntry* TaskRecord::FindParticipant(std::string_view id) const {
  for (const auto& p : roster) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

json TaskRecord::ToJson() const {
  json roster_json = json::array();
  for (const auto& p : roster) {
    roster_json.push_back({{"id", p.id},
                           {"count", p.count},
                           {"state", ParticipantStateName(p.state)},
                           {"endpoint", p.endpoint},
                           {"reported_upload", p.reported_upload}});
  }
  json hist = json::array();
  for (const auto& h : history) {
    json e = {{"status", h.status}, {"at_ms", h.at_ms}};
    if (!h.evidence.is_null()) e["evidence"] = h.evidence;
    hist.push_back(std::move(e));
  }
  return {{"task_id", task_id},
          {"title", title},
          {"description", description},
          {"proposer", proposer},
          {"config", config.ToJson()},
          {"roster", roster_json},
          {"collaborators", {{"S", s_endpoint}, {"T", t_endpoint}}},
          {"state", LifecycleName(state)},
          {"step", step},
          {"status", Status()},
          {"failure", failure},
          {"result_ref", result_ref},
          {"created_ms", created_ms},
          {"updated_ms", updated_ms},
          {"step_started_ms", step_started_ms},
          {"history", hist}};
}

absl::StatusOr<TaskRecord> TaskRecord::FromJson(const json& j) {
  try {
    TaskRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    r.title = j.value("title", "");
    r.description = j.value("description", "");
    r.proposer = j.value("proposer", "");
    JTSNE_ASSIGN_OR_RETURN(r.config, protocol::TaskConfig::FromJson(j.at("config")));
    for (const auto& p : j.at("roster")) {
      RosterEntry e;
      e.id = p.at("id").get<std::string>();
      e.count = p.at("count").get<size_t>();
      JTSNE_ASSIGN_OR_RETURN(e.state,
                             ParseParticipantState(p.at("state").get<std::string>()));
      e.endpoint = p.value("endpoint", "");
      e.reported_upload = p.value("reported_upload", false);
      r.roster.push_back(std::move(e));
    }
    r.s_endpoint = j.at("collaborators").value("S", "");
    r.t_endpoint = j.at("collaborators").value("T", "");
    JTSNE_ASSIGN_OR_RETURN(r.state, ParseLifecycle(j.at("state").get<std::string>()));
    r.step = j.value("step", 0);
    r.failure = j.value("failure", "");
    r.result_ref = j.value("result_ref", "");
    r.created_ms = j.value("created_ms", int64_t{0});
    r.updated_ms = j.value("updated_ms", int64_t{0});
    r.step_started_ms = j.value("step_started_ms", int64_t{0});
    for (const auto& h : j.value("history", json::array())) {
      r.history.push_back({h.at("status").get<std::string>(),
                           h.at("at_ms").get<int64_t>(),
                           h.value("evidence", json())});
    }
    return r;
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad task record: ", e.what()));
  }
}

TaskRegistry::TaskRegistry(RegistryOptions options)
    : options_(std::move(options)) {
  if (!options_.journal_path.empty()) {
    journal_.open(options_.journal_path, std::ios::app);
  }
}

absl::Status TaskRegistry::Replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::string line;
  std::unique_lock<std::shared_mutex> lock(map_mu_);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("task")) {
      return absl::DataLossError(absl::StrCat("bad journal line in ", path));
    }
    JTSNE_ASSIGN_OR_RETURN(TaskRecord r, TaskRecord::FromJson(j.at("task")));
    auto& slot = tasks_[r.task_id];
    if (!slot) slot = std::make_shared<Slot>();
    std::atomic_store(&slot->snapshot,
                      std::shared_ptr<const TaskRecord>(
                          std::make_shared<TaskRecord>(std::move(r))));
  }
  return absl::OkStatus();
}

void TaskRegistry::Journal(const std::string& event, const TaskRecord& r) {
  if (!journal_.is_open()) return;
  const json line = {{"at_ms", r.updated_ms}, {"event", event}, {"task", r.ToJson()}};
  std::lock_guard<std::mutex> lock(journal_mu_);
  journal_ << line.dump() << '\n';
  journal_.flush();
}

std::shared_ptr<TaskRegistry::Slot> TaskRegistry::Find(
    const std::string& task_id) const {
  std::shared_lock<std::shared_mutex> lock(map_mu_);
  const auto it = tasks_.find(task_id);
  return it == tasks_.end() ? nullptr : it->second;
}

template <typename Fn>
absl::StatusOr<TaskRecord> TaskRegistry::Mutate(const std::string& task_id,
                                                const std::string& event,
                                                Fn&& fn) {
  std::shared_ptr<Slot> slot = Find(task_id);
  if (!slot) return absl::NotFoundError(absl::StrCat("unknown task ", task_id));
  std::lock_guard<std::mutex> lock(slot->mu);
  auto next = std::make_shared<TaskRecord>(*std::atomic_load(&slot->snapshot));
  const int64_t now = NowMs();
  const std::string before = next->ToJson().dump();
  const absl::Status status = fn(*next, *slot, now);
  if (next->ToJson().dump() != before) {
    next->updated_ms = now;
    Journal(event, *next);
    std::atomic_store(&slot->snapshot, std::shared_ptr<const TaskRecord>(next));
  }
  if (!status.ok()) return status;
  return *next;
}

absl::StatusOr<TaskRecord> TaskRegistry::Propose(protocol::TaskConfig config,
                                                 std::string proposer) {
  // Noise seeds are a test facility local to T and never leave it.
  config.noise_seed.reset();
  auto record = std::make_shared<TaskRecord>();
  record->title = config.title;
  record->description = config.description;
  record->proposer = std::move(proposer);
  for (const auto& p : config.participants) {
    record->roster.push_back({p.id, p.count, ParticipantState::kInvited, "", false});
  }
  record->created_ms = record->updated_ms = NowMs();
  {
    std::unique_lock<std::shared_mutex> lock(map_mu_);
    do {
      record->task_id = NewTaskId();
    } while (tasks_.count(record->task_id));
    config.task_id = record->task_id;
    JTSNE_RETURN_IF_ERROR(config.Validate());
    record->config = std::move(config);
    Transition(*record, Lifecycle::kPreparing, 0, nullptr, record->created_ms);
    auto slot = std::make_shared<Slot>();
    slot->snapshot = record;
    tasks_.emplace(record->task_id, std::move(slot));
  }
  Journal("propose", *record);
  return *record;
}

std::vector<std::shared_ptr<const TaskRecord>> TaskRegistry::List() const {
  std::vector<std::shared_ptr<const TaskRecord>> out;
  std::shared_lock<std::shared_mutex> lock(map_mu_);
  for (const auto& [id, slot] : tasks_) {
    out.push_back(std::atomic_load(&slot->snapshot));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a->created_ms != b->created_ms ? a->created_ms < b->created_ms
                                          : a->task_id < b->task_id;
  });
  return out;
}

absl::StatusOr<std::shared_ptr<const TaskRecord>> TaskRegistry::Get(
    const std::string& task_id) const {
  std::shared_ptr<Slot> slot = Find(task_id);
  if (!slot) return absl::NotFoundError(absl::StrCat("unknown task ", task_id));
  return std::atomic_load(&slot->snapshot);
}

absl::StatusOr<TaskRecord> TaskRegistry::Join(const std::string& task_id,
                                              const std::string& participant,
                                              const std::string& endpoint) {
  return Mutate(task_id, "join", [&](TaskRecord& r, Slot&, int64_t now) {
    auto it = std::find_if(r.roster.begin(), r.roster.end(),
                           [&](const RosterEntry& e) { return e.id == participant; });
    if (it == r.roster.end()) {
      return absl::NotFoundError(
          absl::StrCat(participant, " is not on the roster of ", task_id));
    }
    if (it->state != ParticipantState::kInvited) {
      if (it->endpoint == endpoint) return absl::OkStatus();  // repeat join
      return absl::AlreadyExistsError(absl::StrCat(
          participant, " already joined from ", it->endpoint));
    }
    if (r.state != Lifecycle::kPreparing) {
      return absl::FailedPreconditionError(
          absl::StrCat("task is ", r.Status(), "; only Preparing tasks accept joins"));
    }
    it->state = ParticipantState::kJoined;
    it->endpoint = endpoint;
    MaybeStart(r, now);
    return absl::OkStatus();
  });
}

absl::StatusOr<TaskRecord> TaskRegistry::MarkUploaded(
    const std::string& task_id, const std::string& participant) {
  return Mutate(task_id, "ready", [&](TaskRecord& r, Slot&, int64_t now) {
    auto it = std::find_if(r.roster.begin(), r.roster.end(),
                           [&](const RosterEntry& e) { return e.id == participant; });
    if (it == r.roster.end()) {
      return absl::NotFoundError(
          absl::StrCat(participant, " is not on the roster of ", task_id));
    }
    if (it->state == ParticipantState::kUploaded) return absl::OkStatus();
    if (r.state != Lifecycle::kPreparing) {
      return absl::FailedPreconditionError(absl::StrCat("task is ", r.Status()));
    }
    if (it->state != ParticipantState::kJoined) {
      return absl::FailedPreconditionError(
          absl::StrCat(participant, " has not joined"));
    }
    it->state = ParticipantState::kUploaded;
    MaybeStart(r, now);
    return absl::OkStatus();
  });
}

absl::StatusOr<TaskRecord> TaskRegistry::ClaimCollaborator(
    const std::string& task_id, Role role, const std::string& endpoint,
    const std::string& token_key) {
  if (role == Role::kP) {
    return absl::InvalidArgumentError("participants join, they do not claim");
  }
  return Mutate(task_id, "claim", [&](TaskRecord& r, Slot& slot, int64_t now) {
    std::string& held = role == Role::kS ? r.s_endpoint : r.t_endpoint;
    if (!held.empty()) {
      if (held == endpoint) return absl::OkStatus();
      return absl::AlreadyExistsError(absl::StrCat(
          "role ", RoleName(role), " of ", task_id, " already claimed by ", held));
    }
    if (r.state != Lifecycle::kPreparing) {
      return absl::FailedPreconditionError(absl::StrCat("task is ", r.Status()));
    }
    held = endpoint;
    if (role == Role::kT) slot.token_key = token_key;
    MaybeStart(r, now);
    return absl::OkStatus();
  });
}

absl::StatusOr<TaskRecord> TaskRegistry::Advance(const std::string& task_id,
                                                 Role role, int step,
                                                 const std::string& participant,
                                                 const std::string& result_ref,
                                                 json evidence) {
  return Mutate(task_id, "advance", [&](TaskRecord& r, Slot&, int64_t now) {
    if (step < 1 || step > 8) {
      return absl::InvalidArgumentError(absl::StrCat("no step ", step));
    }
    if (StepOwner(step) != role) {
      return absl::PermissionDeniedError(
          absl::StrCat("step ", step, " belongs to ", RoleName(StepOwner(step)),
                       ", not ", RoleName(role)));
    }
    if (r.state != Lifecycle::kRunning) {
      return absl::FailedPreconditionError(
          absl::StrCat("task is ", r.Status(), "; cannot report step ", step));
    }
    if (step != r.step) {
      const std::string why = absl::StrCat("out-of-order: step ", step,
                                           " reported while at step ", r.step);
      r.failure = why;
      Transition(r, Lifecycle::kFailed, r.step, nullptr, now);
      return absl::AbortedError(why);
    }
    if (step == 2) {
      auto it = std::find_if(r.roster.begin(), r.roster.end(),
                             [&](const RosterEntry& e) { return e.id == participant; });
      if (it == r.roster.end()) {
        return absl::PermissionDeniedError(
            absl::StrCat("'", participant, "' is not a participant"));
      }
      it->reported_upload = true;
      if (!std::all_of(r.roster.begin(), r.roster.end(),
                       [](const RosterEntry& e) { return e.reported_upload; })) {
        return absl::OkStatus();
      }
    }
    if (step == 8) {
      if (result_ref.empty()) {
        return absl::InvalidArgumentError("step 8 must carry a result_ref");
      }
      r.result_ref = result_ref;
      Transition(r, Lifecycle::kComplete, 8, std::move(evidence), now);
      return absl::OkStatus();
    }
    Transition(r, Lifecycle::kRunning, step + 1, std::move(evidence), now);
    return absl::OkStatus();
  });
}

absl::StatusOr<TaskRecord> TaskRegistry::Fail(const std::string& task_id,
                                              const std::string& reason) {
  return Mutate(task_id, "fail", [&](TaskRecord& r, Slot&, int64_t now) {
    if (r.state == Lifecycle::kComplete || r.state == Lifecycle::kFailed) {
      return absl::FailedPreconditionError(absl::StrCat("task is ", r.Status()));
    }
    r.failure = reason;
    Transition(r, Lifecycle::kFailed, r.step, nullptr, now);
    return absl::OkStatus();
  });
}

std::chrono::milliseconds TaskRegistry::StepDeadline(const TaskRecord& r) const {
  const double n = static_cast<double>(r.config.TotalPoints());
  const double key = r.config.key_bits / 1024.0;
  return options_.step_base_deadline +
         std::chrono::milliseconds(
             static_cast<int64_t>(options_.step_ms_per_pair * n * n * key * key));
}

std::vector<std::string> TaskRegistry::CheckDeadlines(int64_t now_ms) {
  std::vector<std::string> failed;
  for (const auto& r : List()) {
    if (r->state != Lifecycle::kRunning) continue;
    if (now_ms - r->step_started_ms <= StepDeadline(*r).count()) continue;
    const int step = r->step;
    auto res = Mutate(r->task_id, "timeout", [&](TaskRecord& m, Slot&, int64_t now) {
      if (m.state != Lifecycle::kRunning || m.step != step) return absl::OkStatus();
      m.failure = absl::StrCat("timeout: step ", step, " exceeded its deadline");
      Transition(m, Lifecycle::kFailed, step, nullptr, now);
      return absl::OkStatus();
    });
    if (res.ok() && res->state == Lifecycle::kFailed) failed.push_back(r->task_id);
  }
  return failed;
}

absl::StatusOr<std::string> TaskRegistry::IssueToken(
    const std::string& task_id, const std::string& viewer,
    const std::string& kind) const {
  std::shared_ptr<Slot> slot = Find(task_id);
  if (!slot) return absl::NotFoundError(absl::StrCat("unknown task ", task_id));
  const auto record = std::atomic_load(&slot->snapshot);
  if (record->state != Lifecycle::kComplete) {
    return absl::FailedPreconditionError(
        absl::StrCat("task is ", record->Status(), "; results exist only once Complete"));
  }
  if (record->FindParticipant(viewer) == nullptr) {
    return absl::PermissionDeniedError(
        absl::StrCat("'", viewer, "' is not a participant of ", task_id));
  }
  std::lock_guard<std::mutex> lock(slot->mu);
  if (slot->token_key.empty()) {
    return absl::FailedPreconditionError("no token key for T; coordinator restarted?");
  }
  return MintToken(slot->token_key, task_id, viewer, kind);
}

}  // namespace jtsne::net
