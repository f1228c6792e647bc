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

#ifndef JTSNE_NET_SOCKET_H_
#define JTSNE_NET_SOCKET_H_

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "jtsne/net/frame.h"

namespace jtsne::net {

using Duration = std::chrono::milliseconds;

struct Endpoint {
  std::string host;
  uint16_t port = 0;

  std::string ToString() const;
  bool operator==(const Endpoint&) const = default;
};

// Parses "host:port".
absl::StatusOr<Endpoint> ParseEndpoint(std::string_view text);

// A connected TCP stream carrying frames. Sends are serialized so several
// threads may share one connection; receives are single-reader.
class Connection {
 public:
  Connection() = default;
  explicit Connection(int fd) : fd_(fd) {}
  ~Connection();
  Connection(Connection&& other) noexcept;
  Connection& operator=(Connection&& other) noexcept;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  static absl::StatusOr<Connection> Dial(const Endpoint& to, Duration timeout);

  bool open() const { return fd_ >= 0; }
  void Close();
  // Shuts down both directions without releasing the descriptor, waking a
  // blocked reader.
  void Shutdown();

  absl::Status SendFrame(const Frame& frame,
                         size_t chunk_threshold = kDefaultChunkThreshold);
  // Writes raw bytes; used by fault-injection tests.
  absl::Status SendRaw(std::string_view bytes);
  // Receives one logical frame, reassembling chunks. A stream that ends
  // mid-frame yields DataLoss; an idle deadline yields DeadlineExceeded.
  absl::StatusOr<Frame> RecvFrame(Duration timeout);

 private:
  absl::Status ReadExact(char* out, size_t n, Duration timeout, bool at_boundary);

  int fd_ = -1;
  std::mutex send_mu_;
  Reassembler reassembler_;
};

class Listener {
 public:
  Listener() = default;
  ~Listener();
  Listener(Listener&& other) noexcept;
  Listener& operator=(Listener&& other) noexcept;

  // Port 0 picks a free port; see endpoint().
  static absl::StatusOr<Listener> Bind(const Endpoint& at);

  absl::StatusOr<Connection> Accept(Duration timeout);
  const Endpoint& endpoint() const { return endpoint_; }
  void Close();

 private:
  int fd_ = -1;
  Endpoint endpoint_;
};

// Connected pair for tests.
absl::Status MakeConnectionPair(Connection& a, Connection& b);

}  // namespace jtsne::net

#endif  // JTSNE_NET_SOCKET_H_
