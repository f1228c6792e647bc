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

#include "jtsne/protocol/messages.h"

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/common/status_macros.h"

namespace jtsne::protocol {

namespace {

constexpr size_t kMaxMatrixEntries = size_t{1} << 28;

absl::Status ExpectDone(const ByteReader& r) {
  if (!r.done()) return absl::InvalidArgumentError("trailing bytes in message");
  return absl::OkStatus();
}

absl::StatusOr<nlohmann::json> ParseJson(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed JSON: ", e.what()));
  }
}

}  // namespace

std::string_view MessageTypeName(MessageType type) {
  switch (type) {
    case MessageType::kKeyBroadcast: return "KeyBroadcast";
    case MessageType::kDataUpload: return "DataUpload";
    case MessageType::kNoisedData: return "NoisedData";
    case MessageType::kNoisedDistances: return "NoisedDistances";
    case MessageType::kBlindedDistances: return "BlindedDistances";
    case MessageType::kProbMatrix: return "ProbMatrix";
    case MessageType::kEmbeddingResult: return "EmbeddingResult";
    case MessageType::kArtifactRequest: return "ArtifactRequest";
    case MessageType::kArtifactResponse: return "ArtifactResponse";
  }
  return "Unknown";
}

bool IsKnownMessageType(uint8_t tag) { return tag >= 1 && tag <= 9; }

absl::StatusOr<CiphertextMatrix> CiphertextMatrix::From(
    size_t rows, size_t cols, std::span<const ahe::Ciphertext> cts) {
  if (cts.size() != rows * cols) {
    return absl::InvalidArgumentError("ciphertext count does not match shape");
  }
  CiphertextMatrix m{rows, cols, 0, 0, {}};
  m.values.reserve(cts.size());
  for (size_t i = 0; i < cts.size(); ++i) {
    if (i == 0) {
      m.level = cts[i].level;
      m.key_id = cts[i].key_id;
    } else if (cts[i].level != m.level || cts[i].key_id != m.key_id) {
      return absl::InvalidArgumentError(
          "matrix entries must share one key and one level");
    }
    m.values.push_back(cts[i].value);
  }
  return m;
}

std::vector<ahe::Ciphertext> CiphertextMatrix::ToCiphertexts() const {
  std::vector<ahe::Ciphertext> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back({v, key_id, level});
  return out;
}

void CiphertextMatrix::Encode(ByteWriter& w) const {
  w.PutU32(static_cast<uint32_t>(rows));
  w.PutU32(static_cast<uint32_t>(cols));
  w.PutU8(static_cast<uint8_t>(level));
  w.PutU64(key_id);
  for (const auto& v : values) ahe::AppendCiphertextValue(w, v);
}

absl::StatusOr<CiphertextMatrix> CiphertextMatrix::Decode(ByteReader& r) {
  CiphertextMatrix m;
  JTSNE_ASSIGN_OR_RETURN(const uint32_t rows, r.GetU32());
  JTSNE_ASSIGN_OR_RETURN(const uint32_t cols, r.GetU32());
  JTSNE_ASSIGN_OR_RETURN(const uint8_t level, r.GetU8());
  JTSNE_ASSIGN_OR_RETURN(m.key_id, r.GetU64());
  m.rows = rows;
  m.cols = cols;
  m.level = level;
  if (level > ahe::kMaxLevel) {
    return absl::InvalidArgumentError(absl::StrCat("bad ciphertext level ", level));
  }
  const uint64_t count = uint64_t{rows} * cols;
  // Each ciphertext takes at least its 4-byte length prefix.
  if (count > kMaxMatrixEntries || count * 4 > r.remaining()) {
    return absl::DataLossError(
        absl::StrCat("ciphertext matrix ", rows, "x", cols,
                     " does not fit in the remaining ", r.remaining(), " bytes"));
  }
  m.values.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    JTSNE_ASSIGN_OR_RETURN(mpz_class v, ahe::ReadCiphertextValue(r));
    m.values.push_back(std::move(v));
  }
  return m;
}

std::string KeyBroadcast::Encode() const {
  std::string out;
  ByteWriter w(&out);
  w.PutBlob(public_key.dump());
  w.PutBlob(config.ToJson().dump());
  return out;
}

absl::StatusOr<KeyBroadcast> KeyBroadcast::Decode(std::string_view payload) {
  ByteReader r(payload);
  KeyBroadcast m;
  JTSNE_ASSIGN_OR_RETURN(const auto pk_text, r.GetBlob());
  JTSNE_ASSIGN_OR_RETURN(const auto cfg_text, r.GetBlob());
  JTSNE_RETURN_IF_ERROR(ExpectDone(r));
  JTSNE_ASSIGN_OR_RETURN(m.public_key, ParseJson(pk_text));
  JTSNE_ASSIGN_OR_RETURN(const nlohmann::json cfg, ParseJson(cfg_text));
  JTSNE_ASSIGN_OR_RETURN(m.config, TaskConfig::FromJson(cfg));
  return m;
}

std::string DataUpload::Encode() const {
  std::string out;
  ByteWriter w(&out);
  w.PutString(owner_id);
  rows.Encode(w);
  w.PutU32(static_cast<uint32_t>(labels.size()));
  for (const auto& l : labels) {
    w.PutU8(l.has_value() ? 1 : 0);
    if (l) w.PutString(*l);
  }
  return out;
}

absl::StatusOr<DataUpload> DataUpload::Decode(std::string_view payload) {
  ByteReader r(payload);
  DataUpload m;
  JTSNE_ASSIGN_OR_RETURN(const auto owner, r.GetBlob());
  m.owner_id = std::string(owner);
  JTSNE_ASSIGN_OR_RETURN(m.rows, CiphertextMatrix::Decode(r));
  JTSNE_ASSIGN_OR_RETURN(const uint32_t n_labels, r.GetU32());
  if (n_labels != 0 && n_labels != m.rows.rows) {
    return absl::InvalidArgumentError("label count does not match row count");
  }
  for (uint32_t i = 0; i < n_labels; ++i) {
    JTSNE_ASSIGN_OR_RETURN(const uint8_t present, r.GetU8());
    if (present) {
      JTSNE_ASSIGN_OR_RETURN(const auto label, r.GetBlob());
      m.labels.emplace_back(std::string(label));
    } else {
      m.labels.emplace_back(std::nullopt);
    }
  }
  JTSNE_RETURN_IF_ERROR(ExpectDone(r));
  return m;
}

std::string ProbMatrix::Encode() const {
  std::string out;
  ByteWriter w(&out);
  w.PutU32(static_cast<uint32_t>(values.rows()));
  w.PutU32(static_cast<uint32_t>(values.cols()));
  for (double v : values.data()) w.PutDouble(v);
  return out;
}

absl::StatusOr<ProbMatrix> ProbMatrix::Decode(std::string_view payload) {
  ByteReader r(payload);
  JTSNE_ASSIGN_OR_RETURN(const uint32_t rows, r.GetU32());
  JTSNE_ASSIGN_OR_RETURN(const uint32_t cols, r.GetU32());
  const uint64_t count = uint64_t{rows} * cols;
  if (count * 8 != r.remaining()) {
    return absl::DataLossError("probability matrix size mismatch");
  }
  ProbMatrix m{RealMatrix(rows, cols)};
  for (double& v : m.values.data()) {
    JTSNE_ASSIGN_OR_RETURN(v, r.GetDouble());
  }
  return m;
}

std::string EmbeddingResult::Encode() const {
  std::string out;
  ByteWriter w(&out);
  w.PutBlob(artifact_json);
  return out;
}

absl::StatusOr<EmbeddingResult> EmbeddingResult::Decode(std::string_view payload) {
  ByteReader r(payload);
  JTSNE_ASSIGN_OR_RETURN(const auto text, r.GetBlob());
  JTSNE_RETURN_IF_ERROR(ExpectDone(r));
  return EmbeddingResult{std::string(text)};
}

std::string ArtifactRequest::Encode() const {
  std::string out;
  ByteWriter w(&out);
  w.PutString(token);
  w.PutString(viewer);
  w.PutString(kind);
  return out;
}

absl::StatusOr<ArtifactRequest> ArtifactRequest::Decode(std::string_view payload) {
  ByteReader r(payload);
  ArtifactRequest m;
  JTSNE_ASSIGN_OR_RETURN(const auto token, r.GetBlob());
  JTSNE_ASSIGN_OR_RETURN(const auto viewer, r.GetBlob());
  JTSNE_ASSIGN_OR_RETURN(const auto kind, r.GetBlob());
  JTSNE_RETURN_IF_ERROR(ExpectDone(r));
  m.token = std::string(token);
  m.viewer = std::string(viewer);
  m.kind = std::string(kind);
  return m;
}

std::string ArtifactResponse::Encode() const {
  std::string out;
  ByteWriter w(&out);
  w.PutU16(status);
  w.PutBlob(body);
  return out;
}

absl::StatusOr<ArtifactResponse> ArtifactResponse::Decode(
    std::string_view payload) {
  ByteReader r(payload);
  ArtifactResponse m;
  JTSNE_ASSIGN_OR_RETURN(m.status, r.GetU16());
  JTSNE_ASSIGN_OR_RETURN(const auto body, r.GetBlob());
  JTSNE_RETURN_IF_ERROR(ExpectDone(r));
  m.body = std::string(body);
  return m;
}

}  // namespace jtsne::protocol
