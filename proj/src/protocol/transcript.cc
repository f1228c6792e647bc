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

#include "jtsne/protocol/transcript.h"

#include <utility>

namespace jtsne::protocol {

void ViewTranscript::RecordIntegers(int step, std::string kind, std::string name,
                                    const Matrix<mpz_class>& values) {
  if (!enabled_) return;
  entries_.push_back({step, std::move(kind), std::move(name), values.rows(),
                      values.cols(), values.data(), {}});
}

void ViewTranscript::RecordReals(int step, std::string kind, std::string name,
                                 const RealMatrix& values) {
  if (!enabled_) return;
  entries_.push_back({step, std::move(kind), std::move(name), values.rows(),
                      values.cols(), {}, values.data()});
}

std::vector<const TranscriptEntry*> ViewTranscript::Find(
    int step, std::string_view kind) const {
  std::vector<const TranscriptEntry*> out;
  for (const auto& e : entries_) {
    if (e.step == step && e.kind == kind) out.push_back(&e);
  }
  return out;
}

std::string ViewTranscript::ToJsonLines() const {
  std::string out;
  for (const auto& e : entries_) {
    nlohmann::json j = {{"role", role_id_}, {"step", e.step},
                        {"kind", e.kind},   {"name", e.name},
                        {"rows", e.rows},   {"cols", e.cols}};
    if (!e.integers.empty()) {
      nlohmann::json ints = nlohmann::json::array();
      for (const auto& v : e.integers) ints.push_back(v.get_str(16));
      j["integers"] = std::move(ints);
    } else {
      j["reals"] = e.reals;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace jtsne::protocol
