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

#ifndef JTSNE_PROTOCOL_TRANSCRIPT_H_
#define JTSNE_PROTOCOL_TRANSCRIPT_H_

#include <gmpxx.h>

#include <string>
#include <vector>

#include "jtsne/common/matrix.h"
#include "json.hpp"

namespace jtsne::protocol {

// What kind of plaintext a role saw.
inline constexpr char kDecrypted[] = "decrypted";
inline constexpr char kReceivedPlaintext[] = "received_plaintext";
inline constexpr char kOwnInput[] = "own_input";
inline constexpr char kResult[] = "result";

struct TranscriptEntry {
  int step = 0;
  std::string kind;
  std::string name;
  size_t rows = 0;
  size_t cols = 0;
  // Exactly one of these is populated.
  std::vector<mpz_class> integers;  // signed, fixed-point scaled
  std::vector<double> reals;
};

// Append-only log of every plaintext a role observed. Recording is a no-op
// unless enabled (audit mode).
class ViewTranscript {
 public:
  explicit ViewTranscript(std::string role_id = "", bool enabled = false)
      : role_id_(std::move(role_id)), enabled_(enabled) {}

  void RecordIntegers(int step, std::string kind, std::string name,
                      const Matrix<mpz_class>& values);
  void RecordReals(int step, std::string kind, std::string name,
                   const RealMatrix& values);

  const std::string& role_id() const { return role_id_; }
  bool enabled() const { return enabled_; }
  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  std::vector<const TranscriptEntry*> Find(int step, std::string_view kind) const;

  // One JSON object per entry; integers as signed hex strings.
  std::string ToJsonLines() const;

 private:
  std::string role_id_;
  bool enabled_;
  std::vector<TranscriptEntry> entries_;
};

}  // namespace jtsne::protocol

#endif  // JTSNE_PROTOCOL_TRANSCRIPT_H_
