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

#include "jtsne/net/frame.h"

#include <openssl/sha.h>
#include <zlib.h>

#include <algorithm>
#include <cstring>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/common/bytes.h"
#include "jtsne/common/status_macros.h"
#include "jtsne/protocol/messages.h"

namespace jtsne::net {

namespace {

constexpr size_t kChunkHeaderSize = 1 + 4 + 4 + 4;

uint32_t Crc32(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in pieces for very large buffers.
  while (!data.empty()) {
    const size_t n = std::min<size_t>(data.size(), 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data()),
                static_cast<uInt>(n));
    data.remove_prefix(n);
  }
  return static_cast<uint32_t>(crc);
}

}  // namespace

TaskKey TaskKeyFor(std::string_view task_id) {
  TaskKey key{};
  if (task_id.size() == 32) {
    auto raw = HexDecode(task_id);
    if (raw.ok()) {
      std::memcpy(key.data(), raw->data(), key.size());
      return key;
    }
  }
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(task_id.data()),
         task_id.size(), digest);
  std::memcpy(key.data(), digest, key.size());
  return key;
}

bool IsKnownFrameType(uint8_t type) {
  return type == kChunkType || protocol::IsKnownMessageType(type);
}

absl::StatusOr<std::string> EncodeFrame(const Frame& frame) {
  if (!IsKnownFrameType(frame.type)) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown frame type ", frame.type));
  }
  if (frame.payload.size() > kMaxFrameLength - (kFrameHeaderSize - 4)) {
    return absl::OutOfRangeError("frame payload too large; split it first");
  }
  std::string out;
  out.reserve(kFrameHeaderSize + frame.payload.size());
  ByteWriter w(&out);
  w.PutU32(static_cast<uint32_t>(kFrameHeaderSize - 4 + frame.payload.size()));
  w.PutU8(frame.type);
  w.PutRaw(std::string_view(reinterpret_cast<const char*>(frame.task.data()),
                            frame.task.size()));
  w.PutRaw(frame.payload);
  return out;
}

absl::StatusOr<uint32_t> ParseFrameLength(std::string_view prefix) {
  ByteReader r(prefix);
  JTSNE_ASSIGN_OR_RETURN(const uint32_t length, r.GetU32());
  if (length < kFrameHeaderSize - 4) {
    return absl::DataLossError(
        absl::StrCat("frame length ", length, " shorter than header"));
  }
  if (length > kMaxFrameLength) {
    return absl::DataLossError(absl::StrCat("frame length ", length,
                                            " exceeds limit"));
  }
  return length;
}

absl::StatusOr<Frame> DecodeFrame(std::string_view bytes) {
  if (bytes.size() < kFrameHeaderSize) {
    return absl::DataLossError("truncated frame header");
  }
  JTSNE_ASSIGN_OR_RETURN(const uint32_t length,
                         ParseFrameLength(bytes.substr(0, 4)));
  if (bytes.size() - 4 < length) {
    return absl::DataLossError(absl::StrCat("truncated frame: have ",
                                            bytes.size() - 4, " of ", length,
                                            " bytes"));
  }
  if (bytes.size() - 4 > length) {
    return absl::DataLossError("trailing bytes after frame");
  }
  Frame f;
  f.type = static_cast<uint8_t>(bytes[4]);
  if (!IsKnownFrameType(f.type)) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown frame type ", f.type));
  }
  std::memcpy(f.task.data(), bytes.data() + 5, f.task.size());
  f.payload.assign(bytes.substr(kFrameHeaderSize));
  return f;
}

std::vector<Frame> SplitFrame(const Frame& frame, size_t threshold) {
  if (frame.payload.size() <= threshold || threshold == 0) return {frame};
  const size_t count = (frame.payload.size() + threshold - 1) / threshold;
  std::vector<Frame> out;
  out.reserve(count);
  for (size_t seq = 0; seq < count; ++seq) {
    const std::string_view data =
        std::string_view(frame.payload).substr(seq * threshold, threshold);
    Frame c;
    c.type = kChunkType;
    c.task = frame.task;
    c.payload.reserve(kChunkHeaderSize + data.size());
    ByteWriter w(&c.payload);
    w.PutU8(frame.type);
    w.PutU32(static_cast<uint32_t>(seq));
    w.PutU32(static_cast<uint32_t>(count));
    w.PutU32(Crc32(data));
    w.PutRaw(data);
    out.push_back(std::move(c));
  }
  return out;
}

absl::StatusOr<std::optional<Frame>> Reassembler::Feed(Frame frame) {
  if (frame.type != kChunkType) {
    if (pending_.has_value()) {
      pending_.reset();
      return absl::DataLossError("frame interleaved with pending chunks");
    }
    return std::optional<Frame>(std::move(frame));
  }
  ByteReader r(frame.payload);
  JTSNE_ASSIGN_OR_RETURN(const uint8_t type, r.GetU8());
  JTSNE_ASSIGN_OR_RETURN(const uint32_t seq, r.GetU32());
  JTSNE_ASSIGN_OR_RETURN(const uint32_t count, r.GetU32());
  JTSNE_ASSIGN_OR_RETURN(const uint32_t crc, r.GetU32());
  const std::string_view data =
      std::string_view(frame.payload).substr(kChunkHeaderSize);
  if (Crc32(data) != crc) {
    pending_.reset();
    return absl::DataLossError(absl::StrCat("checksum mismatch in chunk ", seq));
  }
  if (type == kChunkType || !IsKnownFrameType(type)) {
    pending_.reset();
    return absl::InvalidArgumentError(
        absl::StrCat("unknown chunked frame type ", type));
  }
  if (!pending_.has_value()) {
    if (seq != 0 || count == 0) {
      return absl::DataLossError(absl::StrCat("chunk ", seq, " of ", count,
                                              " without a start"));
    }
    pending_ = Pending{type, frame.task, count, 0, {}};
  }
  Pending& p = *pending_;
  if (seq != p.next || count != p.count || type != p.type ||
      frame.task != p.task) {
    pending_.reset();
    return absl::DataLossError(
        absl::StrCat("chunk sequence broken at ", seq, "/", count));
  }
  p.data.append(data);
  ++p.next;
  if (p.next < p.count) return std::optional<Frame>();
  Frame done{p.type, p.task, std::move(p.data)};
  pending_.reset();
  return std::optional<Frame>(std::move(done));
}

}  // namespace jtsne::net
