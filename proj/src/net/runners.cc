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

#include "jtsne/net/runners.h"

#include <chrono>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/common/status_macros.h"
#include "jtsne/net/token.h"

namespace jtsne::net {

namespace {

using nlohmann::json;
using protocol::MessageType;
using Clock = std::chrono::steady_clock;

template <typename M>
Frame ToFrame(const std::string& task_id, const M& message) {
  return Frame{static_cast<uint8_t>(M::kType), TaskKeyFor(task_id), message.Encode()};
}

template <typename M>
absl::StatusOr<M> PopMessage(Mailbox& box, const std::string& task_id,
                             std::chrono::milliseconds timeout) {
  JTSNE_ASSIGN_OR_RETURN(
      const Frame f, box.Pop(TaskKeyFor(task_id), static_cast<uint8_t>(M::kType),
                             timeout));
  return M::Decode(f.payload);
}

absl::Status SendTo(PeerPool& peers, const std::string& endpoint,
                    const Frame& frame) {
  JTSNE_ASSIGN_OR_RETURN(const Endpoint to, ParseEndpoint(endpoint));
  return peers.Send(to, frame);
}

json Evidence(Clock::time_point start) {
  return {{"seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
}

// Reports `status` to the coordinator as a task failure, then returns it.
absl::Status FailTask(CoordinatorClient& client, const std::string& task_id,
                      const std::string& who, absl::Status status) {
  if (!status.ok() && !absl::IsAborted(status)) {
    (void)client.Fail(task_id, absl::StrCat(who, ": ", status.ToString()));
  }
  return status;
}

}  // namespace

CollaboratorNode::CollaboratorNode(Role role, NodeOptions options)
    : role_(role),
      options_(std::move(options)),
      client_(options_.coordinator_url),
      token_key_(NewTokenKey()) {}

CollaboratorNode::~CollaboratorNode() { Stop(); }

absl::Status CollaboratorNode::Start() {
  if (role_ == Role::kP) return absl::InvalidArgumentError("not a collaborator role");
  FrameServer::RequestHandler handler;
  if (role_ == Role::kT) {
    handler = [this](const Frame& f) { return HandleRequest(f); };
  }
  return server_.Start(options_.listen, std::move(handler));
}

void CollaboratorNode::Stop() {
  server_.Stop();
  peers_.CloseAll();
}

absl::Status CollaboratorNode::RunTask(const std::string& task_id) {
  JTSNE_RETURN_IF_ERROR(
      client_.Claim(task_id, role_, endpoint().ToString(), token_key_).status());
  return RunClaimed(task_id);
}

absl::Status CollaboratorNode::RunClaimed(const std::string& task_id) {
  const absl::Status s = role_ == Role::kS ? RunS(task_id) : RunT(task_id);
  return FailTask(client_, task_id, absl::StrCat("collaborator ", RoleName(role_)), s);
}

absl::Status CollaboratorNode::Serve(const std::atomic<bool>& stop,
                                     size_t max_tasks) {
  std::vector<std::thread> workers;
  std::atomic<size_t> finished{0};
  std::vector<std::string> mine;
  while (!stop && (max_tasks == 0 || finished < max_tasks)) {
    auto tasks = client_.ListTasks();
    if (tasks.ok()) {
      for (const json& t : *tasks) {
        const std::string id = t.value("task_id", "");
        const std::string held = t.at("collaborators").value(RoleName(role_), "");
        if (t.value("state", "") != "Preparing" || !held.empty()) continue;
        if (max_tasks != 0 && mine.size() >= max_tasks) break;
        if (!client_.Claim(id, role_, endpoint().ToString(), token_key_).ok()) continue;
        mine.push_back(id);
        workers.emplace_back([this, id, &finished] {
          (void)RunClaimed(id);
          ++finished;
        });
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  for (auto& w : workers) w.join();
  return absl::OkStatus();
}

std::shared_ptr<const protocol::CollaboratorS> CollaboratorNode::s_state(
    const std::string& task_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  const auto it = s_done_.find(task_id);
  return it == s_done_.end() ? nullptr : it->second;
}

std::shared_ptr<const protocol::CollaboratorT> CollaboratorNode::t_state(
    const std::string& task_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  const auto it = t_done_.find(task_id);
  return it == t_done_.end() ? nullptr : it->second;
}

absl::Status CollaboratorNode::RunS(const std::string& id) {
  const auto timeout = options_.step_timeout;
  Mailbox& box = server_.mailbox();

  JTSNE_ASSIGN_OR_RETURN(const json rec, client_.WaitForStep(id, 1, timeout));
  JTSNE_ASSIGN_OR_RETURN(protocol::TaskConfig config,
                         protocol::TaskConfig::FromJson(rec.at("config")));
  auto s = std::make_shared<protocol::CollaboratorS>(std::move(config), options_.audit);
  auto start = Clock::now();
  JTSNE_ASSIGN_OR_RETURN(const protocol::KeyBroadcast kb, s->KeyGenBroadcast(options_.keys));
  const Frame key_frame = ToFrame(id, kb);
  JTSNE_RETURN_IF_ERROR(SendTo(peers_, rec.at("collaborators").at("T"), key_frame));
  for (const json& p : rec.at("roster")) {
    JTSNE_RETURN_IF_ERROR(SendTo(peers_, p.at("endpoint"), key_frame));
  }
  JTSNE_RETURN_IF_ERROR(client_.Advance(id, Role::kS, 1, "", "", Evidence(start)).status());

  JTSNE_RETURN_IF_ERROR(client_.WaitForStep(id, 4, timeout).status());
  JTSNE_ASSIGN_OR_RETURN(const auto noised,
                         PopMessage<protocol::NoisedData>(box, id, timeout));
  start = Clock::now();
  JTSNE_ASSIGN_OR_RETURN(const auto z, s->NoisedDistanceMatrix(noised));
  JTSNE_RETURN_IF_ERROR(SendTo(peers_, rec.at("collaborators").at("T"), ToFrame(id, z)));
  JTSNE_RETURN_IF_ERROR(client_.Advance(id, Role::kS, 4, "", "", Evidence(start)).status());

  JTSNE_RETURN_IF_ERROR(client_.WaitForStep(id, 7, timeout).status());
  JTSNE_ASSIGN_OR_RETURN(const auto w,
                         PopMessage<protocol::BlindedDistances>(box, id, timeout));
  start = Clock::now();
  JTSNE_ASSIGN_OR_RETURN(const auto m_prime, s->SymmetricProbabilities(w));
  JTSNE_RETURN_IF_ERROR(
      SendTo(peers_, rec.at("collaborators").at("T"), ToFrame(id, m_prime)));
  {
    std::lock_guard<std::mutex> lock(mu_);
    s_done_[id] = s;
  }
  return client_.Advance(id, Role::kS, 7, "", "", Evidence(start)).status();
}

absl::Status CollaboratorNode::RunT(const std::string& id) {
  const auto timeout = options_.step_timeout;
  Mailbox& box = server_.mailbox();
  auto t = std::make_shared<protocol::CollaboratorT>(options_.audit, options_.faults);

  JTSNE_ASSIGN_OR_RETURN(const json rec, client_.WaitForStep(id, 3, timeout));
  auto start = Clock::now();
  JTSNE_ASSIGN_OR_RETURN(protocol::KeyBroadcast kb,
                         PopMessage<protocol::KeyBroadcast>(box, id, timeout));
  if (kb.config.task_id != id) {
    return absl::PermissionDeniedError("key broadcast for a different task");
  }
  kb.config.noise_seed = options_.noise_seed;
  JTSNE_RETURN_IF_ERROR(t->ReceiveKey(kb));
  for (size_t i = 0; i < rec.at("roster").size(); ++i) {
    JTSNE_ASSIGN_OR_RETURN(const auto up, PopMessage<protocol::DataUpload>(box, id, timeout));
    JTSNE_RETURN_IF_ERROR(t->ReceiveUpload(up));
  }
  JTSNE_ASSIGN_OR_RETURN(const auto noised, t->AddEntryNoise());
  const std::string s_endpoint = rec.at("collaborators").at("S");
  JTSNE_RETURN_IF_ERROR(SendTo(peers_, s_endpoint, ToFrame(id, noised)));
  JTSNE_RETURN_IF_ERROR(client_.Advance(id, Role::kT, 3, "", "", Evidence(start)).status());

  JTSNE_RETURN_IF_ERROR(client_.WaitForStep(id, 5, timeout).status());
  JTSNE_ASSIGN_OR_RETURN(const auto z,
                         PopMessage<protocol::NoisedDistances>(box, id, timeout));
  start = Clock::now();
  JTSNE_RETURN_IF_ERROR(t->RemoveEntryNoise(z));
  JTSNE_RETURN_IF_ERROR(client_.Advance(id, Role::kT, 5, "", "", Evidence(start)).status());

  JTSNE_RETURN_IF_ERROR(client_.WaitForStep(id, 6, timeout).status());
  start = Clock::now();
  JTSNE_ASSIGN_OR_RETURN(const auto w, t->BlindAndPermute());
  JTSNE_RETURN_IF_ERROR(SendTo(peers_, s_endpoint, ToFrame(id, w)));
  JTSNE_RETURN_IF_ERROR(client_.Advance(id, Role::kT, 6, "", "", Evidence(start)).status());

  JTSNE_RETURN_IF_ERROR(client_.WaitForStep(id, 8, timeout).status());
  JTSNE_ASSIGN_OR_RETURN(const auto m_prime,
                         PopMessage<protocol::ProbMatrix>(box, id, timeout));
  start = Clock::now();
  JTSNE_RETURN_IF_ERROR(t->Embed(m_prime));
  {
    std::lock_guard<std::mutex> lock(mu_);
    t_done_[id] = t;
  }
  const std::string result_ref =
      absl::StrCat("t://", endpoint().ToString(), "/", id);
  return client_.Advance(id, Role::kT, 8, "", result_ref, Evidence(start)).status();
}

std::optional<Frame> CollaboratorNode::HandleRequest(const Frame& frame) {
  if (frame.type != static_cast<uint8_t>(MessageType::kArtifactRequest)) {
    return std::nullopt;
  }
  auto respond = [&](int status, std::string body) {
    return Frame{static_cast<uint8_t>(MessageType::kArtifactResponse), frame.task,
                 protocol::ArtifactResponse{static_cast<uint16_t>(status),
                                            std::move(body)}
                     .Encode()};
  };
  auto error = [&](const absl::Status& s) {
    return respond(HttpStatusFor(s), ErrorJson(s).dump());
  };
  auto req = protocol::ArtifactRequest::Decode(frame.payload);
  if (!req.ok()) return error(req.status());
  std::shared_ptr<const protocol::CollaboratorT> t;
  std::string task_id;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [id, state] : t_done_) {
      if (TaskKeyFor(id) == frame.task) {
        task_id = id;
        t = state;
      }
    }
  }
  if (!t) return error(absl::NotFoundError("no finished task with that id at T"));
  if (!VerifyToken(token_key_, req->token, task_id, req->viewer, req->kind)) {
    return error(absl::PermissionDeniedError("invalid access token"));
  }
  if (req->kind == "artifact") {
    auto result = t->ResultFor(req->viewer);
    if (!result.ok()) return error(result.status());
    return respond(200, result->artifact_json);
  }
  if (req->kind == "density") {
    const auto& owners = t->artifact().owners;
    if (std::find(owners.begin(), owners.end(), req->viewer) == owners.end()) {
      return error(absl::PermissionDeniedError("viewer is not a participant"));
    }
    return respond(200, aggregate::ViewFor(t->artifact(), req->viewer).DensityJson().dump());
  }
  return error(absl::InvalidArgumentError(absl::StrCat("unknown kind ", req->kind)));
}

absl::StatusOr<ParticipantOutcome> RunParticipant(const std::string& task_id,
                                                  const protocol::Dataset& data,
                                                  const NodeOptions& options) {
  CoordinatorClient client(options.coordinator_url);
  const std::string who = absl::StrCat("participant ", data.owner_id);
  FrameServer server;
  JTSNE_RETURN_IF_ERROR(server.Start(options.listen));
  PeerPool peers;

  auto run = [&]() -> absl::StatusOr<ParticipantOutcome> {
    JTSNE_ASSIGN_OR_RETURN(const json rec, client.GetTask(task_id));
    JTSNE_ASSIGN_OR_RETURN(const protocol::TaskConfig config,
                           protocol::TaskConfig::FromJson(rec.at("config")));
    JTSNE_RETURN_IF_ERROR(data.Validate(config.dims));
    JTSNE_RETURN_IF_ERROR(
        client.Join(task_id, data.owner_id, server.endpoint().ToString()).status());
    JTSNE_RETURN_IF_ERROR(client.Ready(task_id, data.owner_id).status());

    protocol::Participant p(data, options.audit);
    JTSNE_ASSIGN_OR_RETURN(const json running,
                           client.WaitForStep(task_id, 2, options.step_timeout));
    JTSNE_ASSIGN_OR_RETURN(
        const auto kb,
        PopMessage<protocol::KeyBroadcast>(server.mailbox(), task_id, options.step_timeout));
    if (kb.config.task_id != task_id) {
      return absl::PermissionDeniedError("key broadcast for a different task");
    }
    JTSNE_ASSIGN_OR_RETURN(const auto upload, p.EncryptUpload(kb));
    JTSNE_RETURN_IF_ERROR(
        SendTo(peers, running.at("collaborators").at("T"), ToFrame(task_id, upload)));
    JTSNE_RETURN_IF_ERROR(
        client.Advance(task_id, Role::kP, 2, data.owner_id).status());

    JTSNE_RETURN_IF_ERROR(client.WaitForStep(task_id, 9, options.step_timeout).status());
    JTSNE_ASSIGN_OR_RETURN(const json artifact, client.Artifact(task_id, data.owner_id));
    JTSNE_RETURN_IF_ERROR(p.ReceiveResult(protocol::EmbeddingResult{artifact.dump()}));
    ParticipantOutcome out;
    out.view = *p.result();
    JTSNE_RETURN_IF_ERROR(
        aggregate::AttachLocalAttributes(out.view, data.owner_id, data.points));
    JTSNE_ASSIGN_OR_RETURN(out.density, client.Density(task_id, data.owner_id));
    out.transcript = p.transcript();
    return out;
  };
  auto out = run();
  server.Stop();
  if (!out.ok()) (void)FailTask(client, task_id, who, out.status());
  return out;
}

}  // namespace jtsne::net
