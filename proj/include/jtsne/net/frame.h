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

#ifndef JTSNE_NET_FRAME_H_
#define JTSNE_NET_FRAME_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace jtsne::net {

using TaskKey = std::array<uint8_t, 16>;

// Frame layout on the wire:
//   u32 BE length | u8 type | 16-byte task key | payload
// where length = 17 + payload size.
inline constexpr size_t kFrameHeaderSize = 4 + 1 + 16;
inline constexpr uint8_t kChunkType = 0x7F;
// Frames above this payload size are split into chunk frames.
inline constexpr size_t kDefaultChunkThreshold = size_t{1} << 20;
// Largest length field accepted by a reader.
inline constexpr uint32_t kMaxFrameLength = (uint32_t{1} << 30);

struct Frame {
  uint8_t type = 0;
  TaskKey task{};
  std::string payload;

  bool operator==(const Frame&) const = default;
};

// Maps a task id to its 16-byte key. 32-character hex ids decode directly;
// anything else uses the first 16 bytes of its SHA-256.
TaskKey TaskKeyFor(std::string_view task_id);

// Protocol message tags plus the chunk tag.
bool IsKnownFrameType(uint8_t type);

absl::StatusOr<std::string> EncodeFrame(const Frame& frame);
// Decodes exactly one frame occupying all of `bytes`.
absl::StatusOr<Frame> DecodeFrame(std::string_view bytes);
// Validates a 4-byte length prefix and returns the body size that follows.
absl::StatusOr<uint32_t> ParseFrameLength(std::string_view prefix);

// Splits a frame whose payload exceeds `threshold` into chunk frames:
//   u8 original type | u32 seq | u32 count | u32 crc32(data) | data
// Small frames pass through unchanged.
std::vector<Frame> SplitFrame(const Frame& frame,
                              size_t threshold = kDefaultChunkThreshold);

// Reassembles chunk frames. Non-chunk frames are returned immediately.
class Reassembler {
 public:
  // Returns the completed frame, or nullopt while chunks are pending.
  absl::StatusOr<std::optional<Frame>> Feed(Frame frame);
  bool idle() const { return !pending_.has_value(); }

 private:
  struct Pending {
    uint8_t type;
    TaskKey task;
    uint32_t count;
    uint32_t next;
    std::string data;
  };
  std::optional<Pending> pending_;
};

}  // namespace jtsne::net

#endif  // JTSNE_NET_FRAME_H_
