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

#ifndef JTSNE_PROTOCOL_AUDIT_H_
#define JTSNE_PROTOCOL_AUDIT_H_

#include <gmpxx.h>

#include <string>
#include <vector>

#include "jtsne/common/matrix.h"
#include "jtsne/protocol/transcript.h"
#include "jtsne/protocol/types.h"
#include "json.hpp"

namespace jtsne::protocol {

// Ground truth the auditor compares views against.
struct AuditTruth {
  Matrix<mpz_class> data_int;       // N x m, level 1, roster order
  Matrix<mpz_class> distances_int;  // N x N, level 2
  std::vector<Dataset> datasets;
};

struct PredicateResult {
  std::string id;  // "a".."d"
  std::string description;
  int step = 0;
  bool passed = false;
  std::string detail;
};

struct AuditReport {
  std::vector<PredicateResult> predicates;
  std::vector<std::string> warnings;

  bool passed() const;
  const PredicateResult* Find(std::string_view id) const;
  nlohmann::json ToJson() const;
};

// Checks what each role saw:
//  (a) S's step-4 values equal truth + ledger sigma, with every sigma != 0;
//  (b) S's step-7 values equal d^2 + eta under pi, with a zero diagonal;
//  (c) T decrypted nothing;
//  (d) each participant saw only its own input and the final result.
// An identity pi or an all-zero eta raises a policy warning.
AuditReport AssertViews(const ViewTranscript& s_view,
                        const ViewTranscript& t_view,
                        const std::vector<ViewTranscript>& participant_views,
                        const NoiseLedger& ledger, const AuditTruth& truth);

}  // namespace jtsne::protocol

#endif  // JTSNE_PROTOCOL_AUDIT_H_
