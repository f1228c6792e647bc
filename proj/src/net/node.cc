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

#include "jtsne/net/node.h"

#include <algorithm>
#include <utility>

#include "absl/strings/str_cat.h"
#include "jtsne/common/status_macros.h"

namespace jtsne::net {

namespace {
constexpr Duration kPollInterval(200);
}  // namespace

void Mailbox::Push(Frame frame) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    frames_.push_back(std::move(frame));
  }
  cv_.notify_all();
}

absl::StatusOr<Frame> Mailbox::Pop(const TaskKey& task, uint8_t type,
                                   Duration timeout) {
  std::unique_lock<std::mutex> lock(mu_);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto it = std::find_if(frames_.begin(), frames_.end(),
                                 [&](const Frame& f) {
                                   return f.task == task && f.type == type;
                                 });
    if (it != frames_.end()) {
      Frame out = std::move(*it);
      frames_.erase(it);
      return out;
    }
    if (!failure_.ok()) return failure_;
    if (cv_.wait_until(lock, deadline) == std::cv_status::timeout) {
      return absl::DeadlineExceededError(
          absl::StrCat("no frame of type ", type, " before deadline"));
    }
  }
}

void Mailbox::Fail(absl::Status reason) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    failure_ = std::move(reason);
  }
  cv_.notify_all();
}

size_t Mailbox::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return frames_.size();
}

FrameServer::~FrameServer() { Stop(); }

absl::Status FrameServer::Start(const Endpoint& at, RequestHandler handler) {
  JTSNE_ASSIGN_OR_RETURN(listener_, Listener::Bind(at));
  handler_ = std::move(handler);
  accept_thread_ = std::thread([this] { AcceptLoop(); });
  return absl::OkStatus();
}

void FrameServer::Stop() {
  if (stopping_.exchange(true)) return;
  if (accept_thread_.joinable()) accept_thread_.join();
  listener_.Close();
  std::vector<std::thread> readers;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (auto& c : conns_) c->Shutdown();
    readers.swap(readers_);
  }
  for (auto& t : readers) t.join();
  mailbox_.Fail(absl::CancelledError("frame server stopped"));
}

std::vector<absl::Status> FrameServer::errors() const {
  std::lock_guard<std::mutex> lock(mu_);
  return errors_;
}

void FrameServer::AcceptLoop() {
  while (!stopping_) {
    auto conn = listener_.Accept(kPollInterval);
    if (!conn.ok()) continue;
    auto shared = std::make_shared<Connection>(*std::move(conn));
    std::lock_guard<std::mutex> lock(mu_);
    if (stopping_) break;
    conns_.push_back(shared);
    readers_.emplace_back([this, shared] { ReadLoop(shared); });
  }
}

void FrameServer::ReadLoop(std::shared_ptr<Connection> conn) {
  while (!stopping_) {
    auto frame = conn->RecvFrame(kPollInterval);
    if (absl::IsDeadlineExceeded(frame.status())) continue;
    if (!frame.ok()) {
      if (!absl::IsCancelled(frame.status()) && !stopping_) {
        std::lock_guard<std::mutex> lock(mu_);
        errors_.push_back(frame.status());
      }
      return;
    }
    if (handler_) {
      if (std::optional<Frame> reply = handler_(*frame)) {
        if (!conn->SendFrame(*reply).ok()) return;
        continue;
      }
    }
    mailbox_.Push(*std::move(frame));
  }
}

absl::Status PeerPool::Send(const Endpoint& to, const Frame& frame) {
  std::shared_ptr<Connection> conn;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto& slot = conns_[{to.ToString(), frame.task}];
    if (!slot) {
      JTSNE_ASSIGN_OR_RETURN(Connection c, Connection::Dial(to, dial_timeout_));
      slot = std::make_shared<Connection>(std::move(c));
    }
    conn = slot;
  }
  absl::Status s = conn->SendFrame(frame);
  if (!s.ok()) {
    std::lock_guard<std::mutex> lock(mu_);
    conns_.erase({to.ToString(), frame.task});
  }
  return s;
}

void PeerPool::CloseAll() {
  std::lock_guard<std::mutex> lock(mu_);
  conns_.clear();
}

absl::StatusOr<Frame> Request(const Endpoint& to, const Frame& request,
                              Duration timeout) {
  JTSNE_ASSIGN_OR_RETURN(Connection conn, Connection::Dial(to, timeout));
  JTSNE_RETURN_IF_ERROR(conn.SendFrame(request));
  return conn.RecvFrame(timeout);
}

}  // namespace jtsne::net
