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

#include "jtsne/net/socket.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/common/status_macros.h"

namespace jtsne::net {

namespace {

// Once a frame has started, the peer may pause this long between bytes.
constexpr Duration kStallTimeout(60000);

absl::Status Errno(std::string_view what) {
  return absl::UnavailableError(
      absl::StrCat(std::string(what), ": ", std::strerror(errno)));
}

// Waits for `events` on fd. Returns DeadlineExceeded on timeout.
absl::Status Wait(int fd, short events, Duration timeout) {
  pollfd p{fd, events, 0};
  while (true) {
    const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (rc > 0) return absl::OkStatus();
    if (rc == 0) return absl::DeadlineExceededError("socket timeout");
    if (errno != EINTR) return Errno("poll");
  }
}

void SetNoDelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

std::string Endpoint::ToString() const { return absl::StrCat(host, ":", port); }

absl::StatusOr<Endpoint> ParseEndpoint(std::string_view text) {
  const size_t colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("endpoint must be host:port, got '", std::string(text), "'"));
  }
  unsigned port = 0;
  const std::string_view digits = text.substr(colon + 1);
  const auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || port > 65535) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad port in '", std::string(text), "'"));
  }
  return Endpoint{std::string(text.substr(0, colon)), static_cast<uint16_t>(port)};
}

Connection::~Connection() { Close(); }

Connection::Connection(Connection&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)),
      reassembler_(std::move(other.reassembler_)) {}

Connection& Connection::operator=(Connection&& other) noexcept {
  if (this != &other) {
    Close();
    fd_ = std::exchange(other.fd_, -1);
    reassembler_ = std::move(other.reassembler_);
  }
  return *this;
}

void Connection::Close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Connection::Shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

absl::StatusOr<Connection> Connection::Dial(const Endpoint& to,
                                            Duration timeout) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(to.port);
  if (int rc = ::getaddrinfo(to.host.c_str(), port.c_str(), &hints, &res);
      rc != 0) {
    return absl::UnavailableError(absl::StrCat("resolve ", to.ToString(), ": ",
                                               ::gai_strerror(rc)));
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    return Errno("socket");
  }
  Connection conn(fd);
  const int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0 && errno != EINPROGRESS) {
    return Errno(absl::StrCat("connect ", to.ToString()));
  }
  if (rc != 0) {
    JTSNE_RETURN_IF_ERROR(Wait(fd, POLLOUT, timeout));
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      errno = err;
      return Errno(absl::StrCat("connect ", to.ToString()));
    }
  }
  ::fcntl(fd, F_SETFL, flags);
  SetNoDelay(fd);
  return conn;
}

absl::Status Connection::SendRaw(std::string_view bytes) {
  if (fd_ < 0) return absl::FailedPreconditionError("connection closed");
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return Errno("send");
    }
    bytes.remove_prefix(static_cast<size_t>(n));
  }
  return absl::OkStatus();
}

absl::Status Connection::SendFrame(const Frame& frame, size_t chunk_threshold) {
  std::lock_guard<std::mutex> lock(send_mu_);
  for (const Frame& part : SplitFrame(frame, chunk_threshold)) {
    JTSNE_ASSIGN_OR_RETURN(const std::string bytes, EncodeFrame(part));
    JTSNE_RETURN_IF_ERROR(SendRaw(bytes));
  }
  return absl::OkStatus();
}

absl::Status Connection::ReadExact(char* out, size_t n, Duration timeout,
                                   bool at_boundary) {
  size_t got = 0;
  while (got < n) {
    absl::Status ready = Wait(fd_, POLLIN, got == 0 ? timeout : kStallTimeout);
    if (!ready.ok()) {
      if (!at_boundary || got > 0) {
        return absl::DataLossError(absl::StrCat(
            "truncated frame: stalled after ", got, " of ", n, " bytes"));
      }
      return ready;
    }
    const ssize_t r = ::recv(fd_, out + got, n - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      return Errno("recv");
    }
    if (r == 0) {
      if (at_boundary && got == 0) {
        return absl::CancelledError("connection closed by peer");
      }
      return absl::DataLossError(absl::StrCat(
          "truncated frame: stream ended after ", got, " of ", n, " bytes"));
    }
    got += static_cast<size_t>(r);
  }
  return absl::OkStatus();
}

absl::StatusOr<Frame> Connection::RecvFrame(Duration timeout) {
  if (fd_ < 0) return absl::FailedPreconditionError("connection closed");
  while (true) {
    std::string buf(4, '\0');
    const bool idle = reassembler_.idle();
    JTSNE_RETURN_IF_ERROR(
        ReadExact(buf.data(), 4, idle ? timeout : kStallTimeout, idle));
    JTSNE_ASSIGN_OR_RETURN(const uint32_t length, ParseFrameLength(buf));
    buf.resize(4 + length);
    JTSNE_RETURN_IF_ERROR(
        ReadExact(buf.data() + 4, length, kStallTimeout, false));
    JTSNE_ASSIGN_OR_RETURN(Frame frame, DecodeFrame(buf));
    JTSNE_ASSIGN_OR_RETURN(std::optional<Frame> done,
                           reassembler_.Feed(std::move(frame)));
    if (done.has_value()) return *std::move(done);
  }
}

Listener::~Listener() { Close(); }

Listener::Listener(Listener&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), endpoint_(std::move(other.endpoint_)) {}

Listener& Listener::operator=(Listener&& other) noexcept {
  if (this != &other) {
    Close();
    fd_ = std::exchange(other.fd_, -1);
    endpoint_ = std::move(other.endpoint_);
  }
  return *this;
}

void Listener::Close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
  }
  fd_ = -1;
}

absl::StatusOr<Listener> Listener::Bind(const Endpoint& at) {
  Listener l;
  l.fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (l.fd_ < 0) return Errno("socket");
  int one = 1;
  ::setsockopt(l.fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(at.port);
  const std::string host = at.host == "localhost" ? "127.0.0.1" : at.host;
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("listen address must be an IPv4 literal: ", at.host));
  }
  if (::bind(l.fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    return Errno(absl::StrCat("bind ", at.ToString()));
  }
  if (::listen(l.fd_, 64) != 0) return Errno("listen");
  socklen_t len = sizeof(addr);
  ::getsockname(l.fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  l.endpoint_ = Endpoint{host, ntohs(addr.sin_port)};
  return l;
}

absl::StatusOr<Connection> Listener::Accept(Duration timeout) {
  if (fd_ < 0) return absl::FailedPreconditionError("listener closed");
  JTSNE_RETURN_IF_ERROR(Wait(fd_, POLLIN, timeout));
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) return Errno("accept");
  SetNoDelay(fd);
  return Connection(fd);
}

absl::Status MakeConnectionPair(Connection& a, Connection& b) {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
    return Errno("socketpair");
  }
  a = Connection(fds[0]);
  b = Connection(fds[1]);
  return absl::OkStatus();
}

}  // namespace jtsne::net
