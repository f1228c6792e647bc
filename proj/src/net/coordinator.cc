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

#include "jtsne/net/coordinator.h"

#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "httplib.h"
#include "jtsne/common/status_macros.h"
#include "jtsne/net/frame.h"
#include "jtsne/net/node.h"
#include "jtsne/protocol/messages.h"

namespace jtsne::net {

namespace {

using nlohmann::json;

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, const absl::Status& s) {
  Reply(res, HttpStatusFor(s), ErrorJson(s));
}

// Parses the request body as a JSON object.
absl::StatusOr<json> Body(const httplib::Request& req) {
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InvalidArgumentError("request body must be a JSON object");
  }
  return j;
}

absl::StatusOr<std::string> StringField(const json& j, const char* name) {
  if (!j.contains(name) || !j.at(name).is_string()) {
    return absl::InvalidArgumentError(absl::StrCat("missing string field '", name, "'"));
  }
  return j.at(name).get<std::string>();
}

absl::StatusCode CodeFromName(const std::string& name) {
  for (int c = 0; c <= 16; ++c) {
    const auto code = static_cast<absl::StatusCode>(c);
    if (absl::StatusCodeToString(code) == name) return code;
  }
  return absl::StatusCode::kUnknown;
}

}  // namespace

int HttpStatusFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return 200;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
      return 400;
    case absl::StatusCode::kPermissionDenied:
    case absl::StatusCode::kUnauthenticated:
      return 403;
    case absl::StatusCode::kNotFound:
      return 404;
    case absl::StatusCode::kAlreadyExists:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kAborted:
      return 409;
    case absl::StatusCode::kUnavailable:
      return 502;
    case absl::StatusCode::kDeadlineExceeded:
      return 504;
    default:
      return 500;
  }
}

json ErrorJson(const absl::Status& status) {
  return {{"error",
           {{"code", absl::StatusCodeToString(status.code())},
            {"message", std::string(status.message())}}}};
}

absl::Status StatusFromHttp(int http_status, const std::string& body) {
  const json j = json::parse(body, nullptr, false);
  if (!j.is_discarded() && j.contains("error") && j["error"].is_object()) {
    return absl::Status(CodeFromName(j["error"].value("code", "")),
                        j["error"].value("message", ""));
  }
  const std::string msg = absl::StrCat("HTTP ", http_status, ": ", body);
  switch (http_status) {
    case 400:
      return absl::InvalidArgumentError(msg);
    case 403:
      return absl::PermissionDeniedError(msg);
    case 404:
      return absl::NotFoundError(msg);
    case 409:
      return absl::FailedPreconditionError(msg);
    default:
      return absl::InternalError(msg);
  }
}

CoordinatorServer::CoordinatorServer(CoordinatorOptions options)
    : options_(std::move(options)),
      registry_(options_.registry),
      http_(std::make_unique<httplib::Server>()) {}

CoordinatorServer::~CoordinatorServer() { Stop(); }

absl::Status CoordinatorServer::Start(const Endpoint& at) {
  Routes();
  int port = at.port;
  if (port == 0) {
    port = http_->bind_to_any_port(at.host);
    if (port < 0) return absl::UnavailableError("cannot bind coordinator");
  } else if (!http_->bind_to_port(at.host, port)) {
    return absl::UnavailableError(absl::StrCat("cannot bind ", at.ToString()));
  }
  endpoint_ = Endpoint{at.host, static_cast<uint16_t>(port)};
  serve_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  ticker_ = std::thread([this] {
    std::unique_lock<std::mutex> lock(tick_mu_);
    while (!tick_cv_.wait_for(lock, options_.deadline_check_interval,
                              [this] { return stopping_.load(); })) {
      registry_.CheckDeadlines(NowMs());
    }
  });
  return absl::OkStatus();
}

void CoordinatorServer::Stop() {
  {
    std::lock_guard<std::mutex> lock(tick_mu_);
    if (stopping_.exchange(true)) return;
  }
  tick_cv_.notify_all();
  http_->stop();
  if (serve_thread_.joinable()) serve_thread_.join();
  if (ticker_.joinable()) ticker_.join();
}

void CoordinatorServer::Wait() {
  if (serve_thread_.joinable()) serve_thread_.join();
}

absl::StatusOr<std::string> CoordinatorServer::FetchFromT(
    const std::string& task_id, const std::string& viewer,
    const std::string& kind) {
  JTSNE_ASSIGN_OR_RETURN(const auto record, registry_.Get(task_id));
  JTSNE_ASSIGN_OR_RETURN(const std::string token,
                         registry_.IssueToken(task_id, viewer, kind));
  JTSNE_ASSIGN_OR_RETURN(const Endpoint t, ParseEndpoint(record->t_endpoint));
  Frame req{static_cast<uint8_t>(protocol::MessageType::kArtifactRequest),
            TaskKeyFor(task_id),
            protocol::ArtifactRequest{token, viewer, kind}.Encode()};
  JTSNE_ASSIGN_OR_RETURN(const Frame reply, Request(t, req, options_.artifact_timeout));
  if (reply.type != static_cast<uint8_t>(protocol::MessageType::kArtifactResponse)) {
    return absl::UnavailableError("T answered with an unexpected frame");
  }
  JTSNE_ASSIGN_OR_RETURN(const auto resp,
                         protocol::ArtifactResponse::Decode(reply.payload));
  if (resp.status != 200) return StatusFromHttp(resp.status, resp.body);
  return resp.body;
}

void CoordinatorServer::Routes() {
  httplib::Server& s = *http_;

  s.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    Reply(res, 200, {{"ok", true}});
  });

  s.Get("/tasks", [this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& r : registry_.List()) out.push_back(r->ToJson());
    Reply(res, 200, out);
  });

  s.Post("/tasks", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = Body(req);
    if (!body.ok()) return ReplyError(res, body.status());
    const json& cfg = body->contains("config") ? body->at("config") : *body;
    auto config = protocol::TaskConfig::FromJson(cfg);
    if (!config.ok()) return ReplyError(res, config.status());
    auto rec = registry_.Propose(*std::move(config), body->value("proposer", ""));
    if (!rec.ok()) return ReplyError(res, rec.status());
    Reply(res, 201, rec->ToJson());
  });

  s.Get("/tasks/:id", [this](const httplib::Request& req, httplib::Response& res) {
    auto rec = registry_.Get(req.path_params.at("id"));
    if (!rec.ok()) return ReplyError(res, rec.status());
    Reply(res, 200, (*rec)->ToJson());
  });

  s.Post("/tasks/:id/join", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = Body(req);
    if (!body.ok()) return ReplyError(res, body.status());
    auto who = StringField(*body, "participant_id");
    if (!who.ok()) return ReplyError(res, who.status());
    auto rec = registry_.Join(req.path_params.at("id"), *who, body->value("endpoint", ""));
    if (!rec.ok()) return ReplyError(res, rec.status());
    Reply(res, 200, rec->ToJson());
  });

  s.Post("/tasks/:id/ready", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = Body(req);
    if (!body.ok()) return ReplyError(res, body.status());
    auto who = StringField(*body, "participant_id");
    if (!who.ok()) return ReplyError(res, who.status());
    auto rec = registry_.MarkUploaded(req.path_params.at("id"), *who);
    if (!rec.ok()) return ReplyError(res, rec.status());
    Reply(res, 200, rec->ToJson());
  });

  s.Post("/tasks/:id/collaborators",
         [this](const httplib::Request& req, httplib::Response& res) {
           auto body = Body(req);
           if (!body.ok()) return ReplyError(res, body.status());
           auto role_name = StringField(*body, "role");
           if (!role_name.ok()) return ReplyError(res, role_name.status());
           auto role = ParseRole(*role_name);
           if (!role.ok()) return ReplyError(res, role.status());
           auto endpoint = StringField(*body, "endpoint");
           if (!endpoint.ok()) return ReplyError(res, endpoint.status());
           auto rec = registry_.ClaimCollaborator(req.path_params.at("id"), *role,
                                                  *endpoint,
                                                  body->value("token_key", ""));
           if (!rec.ok()) return ReplyError(res, rec.status());
           Reply(res, 200, rec->ToJson());
         });

  s.Post("/tasks/:id/advance", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = Body(req);
    if (!body.ok()) return ReplyError(res, body.status());
    auto role_name = StringField(*body, "role");
    if (!role_name.ok()) return ReplyError(res, role_name.status());
    auto role = ParseRole(*role_name);
    if (!role.ok()) return ReplyError(res, role.status());
    if (!body->contains("step") || !body->at("step").is_number_integer()) {
      return ReplyError(res, absl::InvalidArgumentError("missing integer field 'step'"));
    }
    auto rec = registry_.Advance(req.path_params.at("id"), *role,
                                 body->at("step").get<int>(),
                                 body->value("participant_id", ""),
                                 body->value("result_ref", ""),
                                 body->value("evidence", json()));
    if (!rec.ok()) return ReplyError(res, rec.status());
    Reply(res, 200, rec->ToJson());
  });

  s.Post("/tasks/:id/fail", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = Body(req);
    if (!body.ok()) return ReplyError(res, body.status());
    auto rec = registry_.Fail(req.path_params.at("id"), body->value("reason", "unspecified"));
    if (!rec.ok()) return ReplyError(res, rec.status());
    Reply(res, 200, rec->ToJson());
  });

  for (const std::string kind : {"artifact", "density"}) {
    s.Get("/tasks/:id/" + kind,
          [this, kind](const httplib::Request& req, httplib::Response& res) {
            const std::string viewer = req.get_param_value("participant");
            if (viewer.empty()) {
              return ReplyError(res, absl::InvalidArgumentError(
                                         "query parameter 'participant' is required"));
            }
            auto body = FetchFromT(req.path_params.at("id"), viewer, kind);
            if (!body.ok()) return ReplyError(res, body.status());
            res.status = 200;
            res.set_content(*body, "application/json");
          });
  }
}

CoordinatorClient::CoordinatorClient(std::string url,
                                     std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout) {
  while (!url_.empty() && url_.back() == '/') url_.pop_back();
  if (url_.find("://") == std::string::npos) url_ = "http://" + url_;
}

absl::StatusOr<json> CoordinatorClient::Call(const std::string& method,
                                             const std::string& path,
                                             const json& body) {
  httplib::Client cli(url_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  cli.set_connection_timeout(5, 0);
  cli.set_read_timeout(secs.count(), 0);
  cli.set_write_timeout(secs.count(), 0);
  httplib::Result res = method == "GET"
                            ? cli.Get(path)
                            : cli.Post(path, body.is_null() ? "{}" : body.dump(),
                                       "application/json");
  if (!res) {
    return absl::UnavailableError(absl::StrCat(
        "coordinator ", url_, " unreachable: ", httplib::to_string(res.error())));
  }
  if (res->status >= 300) return StatusFromHttp(res->status, res->body);
  json j = json::parse(res->body, nullptr, false);
  if (j.is_discarded()) {
    return absl::DataLossError(absl::StrCat("non-JSON reply from ", path));
  }
  return j;
}

absl::StatusOr<json> CoordinatorClient::ListTasks() { return Call("GET", "/tasks"); }

absl::StatusOr<json> CoordinatorClient::Propose(const json& config,
                                                const std::string& proposer) {
  return Call("POST", "/tasks", {{"config", config}, {"proposer", proposer}});
}

absl::StatusOr<json> CoordinatorClient::GetTask(const std::string& id) {
  return Call("GET", "/tasks/" + id);
}

absl::StatusOr<json> CoordinatorClient::Join(const std::string& id,
                                             const std::string& participant,
                                             const std::string& endpoint) {
  return Call("POST", "/tasks/" + id + "/join",
              {{"participant_id", participant}, {"endpoint", endpoint}});
}

absl::StatusOr<json> CoordinatorClient::Ready(const std::string& id,
                                              const std::string& participant) {
  return Call("POST", "/tasks/" + id + "/ready", {{"participant_id", participant}});
}

absl::StatusOr<json> CoordinatorClient::Claim(const std::string& id, Role role,
                                              const std::string& endpoint,
                                              const std::string& token_key) {
  return Call("POST", "/tasks/" + id + "/collaborators",
              {{"role", RoleName(role)}, {"endpoint", endpoint}, {"token_key", token_key}});
}

absl::StatusOr<json> CoordinatorClient::Advance(const std::string& id, Role role,
                                                int step,
                                                const std::string& participant,
                                                const std::string& result_ref,
                                                const json& evidence) {
  json body = {{"role", RoleName(role)}, {"step", step}};
  if (!participant.empty()) body["participant_id"] = participant;
  if (!result_ref.empty()) body["result_ref"] = result_ref;
  if (!evidence.is_null()) body["evidence"] = evidence;
  return Call("POST", "/tasks/" + id + "/advance", body);
}

absl::StatusOr<json> CoordinatorClient::Fail(const std::string& id,
                                             const std::string& reason) {
  return Call("POST", "/tasks/" + id + "/fail", {{"reason", reason}});
}

absl::StatusOr<json> CoordinatorClient::Artifact(const std::string& id,
                                                 const std::string& participant) {
  return Call("GET", "/tasks/" + id + "/artifact?participant=" + participant);
}

absl::StatusOr<json> CoordinatorClient::Density(const std::string& id,
                                                const std::string& participant) {
  return Call("GET", "/tasks/" + id + "/density?participant=" + participant);
}

absl::StatusOr<json> CoordinatorClient::WaitForStep(
    const std::string& id, int step, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    JTSNE_ASSIGN_OR_RETURN(json rec, GetTask(id));
    const std::string state = rec.value("state", "");
    const int at = rec.value("step", 0);
    if (state == "Failed") {
      return absl::AbortedError(
          absl::StrCat("task ", id, " failed: ", rec.value("failure", "")));
    }
    if (step == 9 && state == "Complete") return rec;
    if (state == "Running" && at == step) return rec;
    if (state == "Complete" || (state == "Running" && at > step)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "task ", id, " is already ", rec.value("status", ""), "; waited for step ", step));
    }
    if (std::chrono::steady_clock::now() > deadline) {
      return absl::DeadlineExceededError(absl::StrCat(
          "task ", id, " still ", rec.value("status", ""), " waiting for step ", step));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

}  // namespace jtsne::net
