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

#include "jtsne/protocol/audit.h"

#include <algorithm>

#include "absl/strings/str_cat.h"

namespace jtsne::protocol {

namespace {

PredicateResult CheckEntryNoise(const ViewTranscript& s,
                                const NoiseLedger& ledger,
                                const AuditTruth& truth) {
  PredicateResult r{"a", "S sees data only through non-zero entry noise", 4,
                    false, ""};
  const auto seen = s.Find(4, kDecrypted);
  if (seen.size() != 1) {
    r.detail = absl::StrCat("expected one step-4 view, found ", seen.size());
    return r;
  }
  const TranscriptEntry& e = *seen[0];
  const size_t n = truth.data_int.rows(), m = truth.data_int.cols();
  if (e.rows != n || e.cols != m || ledger.sigma.rows() != n ||
      ledger.sigma.cols() != m) {
    r.detail = "shape mismatch between view, ledger and truth";
    return r;
  }
  for (size_t idx = 0; idx < n * m; ++idx) {
    const mpz_class& sigma = ledger.sigma.data()[idx];
    if (e.integers[idx] - truth.data_int.data()[idx] != sigma) {
      r.detail = absl::StrCat("entry ", idx / m, ",", idx % m,
                              " differs from truth by something other than sigma");
      return r;
    }
    if (sigma == 0) {
      r.detail = absl::StrCat("entry ", idx / m, ",", idx % m,
                              " carries zero noise: S saw the raw value");
      return r;
    }
  }
  r.passed = true;
  return r;
}

PredicateResult CheckRowNoise(const ViewTranscript& s, const NoiseLedger& ledger,
                              const AuditTruth& truth) {
  PredicateResult r{"b", "S sees distances only row-blinded and permuted", 7,
                    false, ""};
  const auto seen = s.Find(7, kDecrypted);
  if (seen.size() != 1) {
    r.detail = absl::StrCat("expected one step-7 view, found ", seen.size());
    return r;
  }
  const TranscriptEntry& e = *seen[0];
  const size_t n = truth.distances_int.rows();
  if (e.rows != n || e.cols != n || ledger.pi.size() != n ||
      ledger.eta.size() != n || !IsPermutation(ledger.pi)) {
    r.detail = "shape mismatch or invalid permutation";
    return r;
  }
  for (size_t a = 0; a < n; ++a) {
    const size_t i = ledger.pi[a];
    for (size_t b = 0; b < n; ++b) {
      const size_t j = ledger.pi[b];
      const mpz_class& w = e.integers[a * n + b];
      const mpz_class want =
          a == b ? mpz_class(0) : truth.distances_int(i, j) + ledger.eta[i];
      if (w != want) {
        r.detail = absl::StrCat("W'[", a, "][", b, "] != d^2[pi(a)][pi(b)] + eta");
        return r;
      }
    }
  }
  r.passed = true;
  return r;
}

PredicateResult CheckNoDecryptionAtT(const ViewTranscript& t) {
  PredicateResult r{"c", "T observes no decrypted plaintext", 0, false, ""};
  for (const auto& e : t.entries()) {
    if (e.kind == kDecrypted) {
      r.step = e.step;
      r.detail = absl::StrCat("T holds decrypted '", e.name, "' at step ", e.step);
      return r;
    }
  }
  r.passed = true;
  return r;
}

PredicateResult CheckParticipants(const std::vector<ViewTranscript>& views,
                                  const AuditTruth& truth) {
  PredicateResult r{"d", "participants see only their own data and the result",
                    0, false, ""};
  for (const auto& view : views) {
    const std::string prefix = "participant:";
    const std::string owner = view.role_id().substr(
        std::min(prefix.size(), view.role_id().size()));
    const auto ds = std::find_if(truth.datasets.begin(), truth.datasets.end(),
                                 [&](const Dataset& d) { return d.owner_id == owner; });
    if (ds == truth.datasets.end()) {
      r.detail = absl::StrCat("no dataset for ", view.role_id());
      return r;
    }
    bool saw_input = false;
    for (const auto& e : view.entries()) {
      if (e.kind == kOwnInput) {
        if (e.reals != ds->points.data()) {
          r.step = e.step;
          r.detail = absl::StrCat(owner, " recorded input that is not its own");
          return r;
        }
        saw_input = true;
      } else if (e.kind != kResult) {
        r.step = e.step;
        r.detail = absl::StrCat(owner, " observed '", e.kind, ":", e.name,
                                "' at step ", e.step);
        return r;
      }
    }
    if (!saw_input) {
      r.detail = absl::StrCat(owner, " transcript is empty; audit mode off?");
      return r;
    }
  }
  r.passed = true;
  return r;
}

}  // namespace

bool AuditReport::passed() const {
  return std::all_of(predicates.begin(), predicates.end(),
                     [](const PredicateResult& p) { return p.passed; });
}

const PredicateResult* AuditReport::Find(std::string_view id) const {
  for (const auto& p : predicates) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

nlohmann::json AuditReport::ToJson() const {
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& p : predicates) {
    preds.push_back({{"id", p.id},
                     {"description", p.description},
                     {"step", p.step},
                     {"passed", p.passed},
                     {"detail", p.detail}});
  }
  return {{"passed", passed()}, {"predicates", preds}, {"warnings", warnings}};
}

AuditReport AssertViews(const ViewTranscript& s_view,
                        const ViewTranscript& t_view,
                        const std::vector<ViewTranscript>& participant_views,
                        const NoiseLedger& ledger, const AuditTruth& truth) {
  AuditReport report;
  report.predicates.push_back(CheckEntryNoise(s_view, ledger, truth));
  report.predicates.push_back(CheckRowNoise(s_view, ledger, truth));
  report.predicates.push_back(CheckNoDecryptionAtT(t_view));
  report.predicates.push_back(CheckParticipants(participant_views, truth));
  bool identity = ledger.pi.size() > 1;
  for (size_t a = 0; a < ledger.pi.size(); ++a) identity &= ledger.pi[a] == a;
  if (identity) {
    report.warnings.push_back(
        "policy: permutation pi is the identity; S learns row positions");
  }
  if (!ledger.eta.empty() &&
      std::all_of(ledger.eta.begin(), ledger.eta.end(),
                  [](const mpz_class& e) { return e == 0; })) {
    report.warnings.push_back(
        "policy: row noise eta is zero; S sees exact squared distances");
  }
  return report;
}

}  // namespace jtsne::protocol
