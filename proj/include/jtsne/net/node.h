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

#ifndef JTSNE_NET_NODE_H_
#define JTSNE_NET_NODE_H_

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "jtsne/net/frame.h"
#include "jtsne/net/socket.h"

namespace jtsne::net {

// Frames received by a role, waiting to be claimed by (task, type).
class Mailbox {
 public:
  void Push(Frame frame);
  absl::StatusOr<Frame> Pop(const TaskKey& task, uint8_t type,
                            Duration timeout);
  // Wakes all waiters with `reason`; later pops fail the same way.
  void Fail(absl::Status reason);
  size_t size() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Frame> frames_;
  absl::Status failure_;
};

// Accepts peer connections and reads frames from each. Frames for which
// the request handler returns a reply are answered on the same connection;
// all others go to the mailbox.
class FrameServer {
 public:
  using RequestHandler = std::function<std::optional<Frame>(const Frame&)>;

  FrameServer() = default;
  ~FrameServer();
  FrameServer(const FrameServer&) = delete;
  FrameServer& operator=(const FrameServer&) = delete;

  absl::Status Start(const Endpoint& at, RequestHandler handler = nullptr);
  void Stop();

  const Endpoint& endpoint() const { return listener_.endpoint(); }
  Mailbox& mailbox() { return mailbox_; }
  // Receive errors seen on peer connections (truncation, checksum).
  std::vector<absl::Status> errors() const;

 private:
  void AcceptLoop();
  void ReadLoop(std::shared_ptr<Connection> conn);

  Listener listener_;
  RequestHandler handler_;
  Mailbox mailbox_;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<Connection>> conns_;
  std::vector<std::thread> readers_;
  std::vector<absl::Status> errors_;
};

// Outbound connections, one per (peer, task), reused across messages.
class PeerPool {
 public:
  explicit PeerPool(Duration dial_timeout = Duration(10000))
      : dial_timeout_(dial_timeout) {}

  absl::Status Send(const Endpoint& to, const Frame& frame);
  void CloseAll();

 private:
  Duration dial_timeout_;
  std::mutex mu_;
  std::map<std::pair<std::string, TaskKey>, std::shared_ptr<Connection>> conns_;
};

// One-shot request/response on a fresh connection.
absl::StatusOr<Frame> Request(const Endpoint& to, const Frame& request,
                              Duration timeout);

}  // namespace jtsne::net

#endif  // JTSNE_NET_NODE_H_
