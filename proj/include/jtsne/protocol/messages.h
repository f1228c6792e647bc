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

#ifndef JTSNE_PROTOCOL_MESSAGES_H_
#define JTSNE_PROTOCOL_MESSAGES_H_

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/ahe/paillier.h"
#include "jtsne/common/matrix.h"
#include "jtsne/protocol/types.h"
#include "json.hpp"

namespace jtsne::protocol {

// Frame type tags. Values are part of the wire format.
enum class MessageType : uint8_t {
  kKeyBroadcast = 1,
  kDataUpload = 2,
  kNoisedData = 3,
  kNoisedDistances = 4,
  kBlindedDistances = 5,
  kProbMatrix = 6,
  kEmbeddingResult = 7,
  kArtifactRequest = 8,
  kArtifactResponse = 9,
};

std::string_view MessageTypeName(MessageType type);
bool IsKnownMessageType(uint8_t tag);

// Row-major ciphertexts with a (rows, cols, level) header. Wire form:
// u32 rows, u32 cols, u8 level, u64 key id, then per value a u32 length and
// the big-endian magnitude.
struct CiphertextMatrix {
  size_t rows = 0;
  size_t cols = 0;
  int level = 0;
  uint64_t key_id = 0;
  std::vector<mpz_class> values;

  static absl::StatusOr<CiphertextMatrix> From(
      size_t rows, size_t cols, std::span<const ahe::Ciphertext> cts);
  std::vector<ahe::Ciphertext> ToCiphertexts() const;

  void Encode(ByteWriter& w) const;
  static absl::StatusOr<CiphertextMatrix> Decode(ByteReader& r);
};

struct KeyBroadcast {
  static constexpr MessageType kType = MessageType::kKeyBroadcast;
  nlohmann::json public_key;
  TaskConfig config;

  std::string Encode() const;
  static absl::StatusOr<KeyBroadcast> Decode(std::string_view payload);
};

struct DataUpload {
  static constexpr MessageType kType = MessageType::kDataUpload;
  std::string owner_id;
  CiphertextMatrix rows;  // N_p x m, level 1
  // Plaintext class tags, sent only for scatterplot tasks.
  std::vector<std::optional<std::string>> labels;

  std::string Encode() const;
  static absl::StatusOr<DataUpload> Decode(std::string_view payload);
};

// Ciphertext-matrix messages share one layout.
template <MessageType T>
struct MatrixMessage {
  static constexpr MessageType kType = T;
  CiphertextMatrix matrix;

  std::string Encode() const {
    std::string out;
    ByteWriter w(&out);
    matrix.Encode(w);
    return out;
  }
  static absl::StatusOr<MatrixMessage> Decode(std::string_view payload);
};

using NoisedData = MatrixMessage<MessageType::kNoisedData>;
using NoisedDistances = MatrixMessage<MessageType::kNoisedDistances>;
using BlindedDistances = MatrixMessage<MessageType::kBlindedDistances>;

struct ProbMatrix {
  static constexpr MessageType kType = MessageType::kProbMatrix;
  RealMatrix values;  // N x N, permuted index space

  std::string Encode() const;
  static absl::StatusOr<ProbMatrix> Decode(std::string_view payload);
};

struct EmbeddingResult {
  static constexpr MessageType kType = MessageType::kEmbeddingResult;
  std::string artifact_json;

  std::string Encode() const;
  static absl::StatusOr<EmbeddingResult> Decode(std::string_view payload);
};

struct ArtifactRequest {
  static constexpr MessageType kType = MessageType::kArtifactRequest;
  std::string token;
  std::string viewer;
  std::string kind;  // "artifact" or "density"

  std::string Encode() const;
  static absl::StatusOr<ArtifactRequest> Decode(std::string_view payload);
};

struct ArtifactResponse {
  static constexpr MessageType kType = MessageType::kArtifactResponse;
  uint16_t status = 200;  // HTTP-style
  std::string body;

  std::string Encode() const;
  static absl::StatusOr<ArtifactResponse> Decode(std::string_view payload);
};

template <MessageType T>
absl::StatusOr<MatrixMessage<T>> MatrixMessage<T>::Decode(
    std::string_view payload) {
  ByteReader r(payload);
  auto m = CiphertextMatrix::Decode(r);
  if (!m.ok()) return m.status();
  if (!r.done()) return absl::InvalidArgumentError("trailing bytes in message");
  return MatrixMessage{*std::move(m)};
}

}  // namespace jtsne::protocol

#endif  // JTSNE_PROTOCOL_MESSAGES_H_
