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

#include "jtsne/common/bytes.h"

#include <bit>
#include <cstring>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace jtsne {

void ByteWriter::PutU8(uint8_t v) { out_->push_back(static_cast<char>(v)); }

void ByteWriter::PutU16(uint16_t v) {
  PutU8(static_cast<uint8_t>(v >> 8));
  PutU8(static_cast<uint8_t>(v));
}

void ByteWriter::PutU32(uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    PutU8(static_cast<uint8_t>(v >> shift));
  }
}

void ByteWriter::PutU64(uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    PutU8(static_cast<uint8_t>(v >> shift));
  }
}

void ByteWriter::PutDouble(double v) { PutU64(std::bit_cast<uint64_t>(v)); }

void ByteWriter::PutBlob(std::string_view bytes) {
  PutU32(static_cast<uint32_t>(bytes.size()));
  out_->append(bytes);
}

absl::StatusOr<std::string_view> ByteReader::GetRaw(size_t n) {
  if (remaining() < n) {
    return absl::DataLossError(
        absl::StrCat("truncated input: need ", n, " bytes, have ", remaining()));
  }
  std::string_view out = in_.substr(pos_, n);
  pos_ += n;
  return out;
}

absl::StatusOr<uint8_t> ByteReader::GetU8() {
  auto raw = GetRaw(1);
  if (!raw.ok()) return raw.status();
  return static_cast<uint8_t>((*raw)[0]);
}

absl::StatusOr<uint16_t> ByteReader::GetU16() {
  auto raw = GetRaw(2);
  if (!raw.ok()) return raw.status();
  return static_cast<uint16_t>((static_cast<uint8_t>((*raw)[0]) << 8) |
                               static_cast<uint8_t>((*raw)[1]));
}

absl::StatusOr<uint32_t> ByteReader::GetU32() {
  auto raw = GetRaw(4);
  if (!raw.ok()) return raw.status();
  uint32_t v = 0;
  for (char c : *raw) v = (v << 8) | static_cast<uint8_t>(c);
  return v;
}

absl::StatusOr<uint64_t> ByteReader::GetU64() {
  auto raw = GetRaw(8);
  if (!raw.ok()) return raw.status();
  uint64_t v = 0;
  for (char c : *raw) v = (v << 8) | static_cast<uint8_t>(c);
  return v;
}

absl::StatusOr<double> ByteReader::GetDouble() {
  auto bits = GetU64();
  if (!bits.ok()) return bits.status();
  return std::bit_cast<double>(*bits);
}

absl::StatusOr<std::string_view> ByteReader::GetBlob() {
  auto len = GetU32();
  if (!len.ok()) return len.status();
  return GetRaw(*len);
}

std::string HexEncode(std::string_view bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xf]);
  }
  return out;
}

absl::StatusOr<std::string> HexDecode(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    return absl::InvalidArgumentError("hex string has odd length");
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out(hex.size() / 2, '\0');
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      return absl::InvalidArgumentError("invalid hex digit");
    }
    out[i] = static_cast<char>((hi << 4) | lo);
  }
  return out;
}

}  // namespace jtsne
