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

#ifndef JTSNE_COMMON_BYTES_H_
#define JTSNE_COMMON_BYTES_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"

namespace jtsne {

// Appends fixed-width big-endian integers and length-prefixed blobs to a
// byte string. All wire integers in this project are big-endian.
class ByteWriter {
 public:
  explicit ByteWriter(std::string* out) : out_(out) {}

  void PutU8(uint8_t v);
  void PutU16(uint16_t v);
  void PutU32(uint32_t v);
  void PutU64(uint64_t v);
  void PutDouble(double v);  // IEEE-754 bits, big-endian
  // u32 length prefix followed by the raw bytes.
  void PutBlob(std::string_view bytes);
  void PutString(std::string_view s) { PutBlob(s); }
  void PutRaw(std::string_view bytes) { out_->append(bytes); }

 private:
  std::string* out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}

  absl::StatusOr<uint8_t> GetU8();
  absl::StatusOr<uint16_t> GetU16();
  absl::StatusOr<uint32_t> GetU32();
  absl::StatusOr<uint64_t> GetU64();
  absl::StatusOr<double> GetDouble();
  absl::StatusOr<std::string_view> GetBlob();
  absl::StatusOr<std::string_view> GetRaw(size_t n);

  size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  size_t pos_ = 0;
};

// Encoding helpers shared by the wire format and tests.
std::string HexEncode(std::string_view bytes);
absl::StatusOr<std::string> HexDecode(std::string_view hex);

}  // namespace jtsne

#endif  // JTSNE_COMMON_BYTES_H_
