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

#include "jtsne/protocol/driver.h"

#include <algorithm>
#include <chrono>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/ahe/fixed_point.h"
#include "jtsne/common/status_macros.h"
#include "jtsne/kernels/crypto.h"

namespace jtsne::protocol {

namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Encodes and decodes a message, counting its bytes.
template <typename M>
absl::StatusOr<M> Wire(const M& message, size_t& bytes) {
  const std::string payload = message.Encode();
  bytes += payload.size();
  return M::Decode(payload);
}

}  // namespace

absl::StatusOr<LocalRunResult> RunLocalProtocol(
    const std::vector<Dataset>& datasets, const TaskConfig& config,
    LocalRunOptions options) {
  JTSNE_RETURN_IF_ERROR(config.Validate());
  LocalRunResult out;
  CollaboratorS s(config, options.audit);
  CollaboratorT t(options.audit, options.faults);
  std::vector<Participant> participants;
  for (const auto& spec : config.participants) {
    const auto it = std::find_if(datasets.begin(), datasets.end(),
                                 [&](const Dataset& d) { return d.owner_id == spec.id; });
    if (it == datasets.end()) {
      return absl::NotFoundError(absl::StrCat("no dataset for ", spec.id));
    }
    participants.emplace_back(*it, options.audit);
  }

  auto start = Clock::now();
  JTSNE_ASSIGN_OR_RETURN(const KeyBroadcast key,
                         s.KeyGenBroadcast(std::move(options.keys)));
  JTSNE_ASSIGN_OR_RETURN(const KeyBroadcast key_at_t, Wire(key, out.step_bytes[1]));
  JTSNE_RETURN_IF_ERROR(t.ReceiveKey(key_at_t));
  out.step_seconds[1] = Since(start);

  start = Clock::now();
  for (Participant& p : participants) {
    JTSNE_ASSIGN_OR_RETURN(const KeyBroadcast key_at_p, Wire(key, out.step_bytes[1]));
    JTSNE_ASSIGN_OR_RETURN(const DataUpload up, p.EncryptUpload(key_at_p));
    JTSNE_ASSIGN_OR_RETURN(const DataUpload up_at_t, Wire(up, out.step_bytes[2]));
    JTSNE_RETURN_IF_ERROR(t.ReceiveUpload(up_at_t));
  }
  out.step_seconds[2] = Since(start);

  start = Clock::now();
  JTSNE_ASSIGN_OR_RETURN(const NoisedData noised, t.AddEntryNoise());
  JTSNE_ASSIGN_OR_RETURN(const NoisedData noised_at_s, Wire(noised, out.step_bytes[3]));
  out.step_seconds[3] = Since(start);

  start = Clock::now();
  JTSNE_ASSIGN_OR_RETURN(const NoisedDistances z, s.NoisedDistanceMatrix(noised_at_s));
  JTSNE_ASSIGN_OR_RETURN(const NoisedDistances z_at_t, Wire(z, out.step_bytes[4]));
  out.step_seconds[4] = Since(start);

  start = Clock::now();
  JTSNE_RETURN_IF_ERROR(t.RemoveEntryNoise(z_at_t));
  out.step_seconds[5] = Since(start);

  start = Clock::now();
  JTSNE_ASSIGN_OR_RETURN(const BlindedDistances w, t.BlindAndPermute());
  JTSNE_ASSIGN_OR_RETURN(const BlindedDistances w_at_s, Wire(w, out.step_bytes[6]));
  out.step_seconds[6] = Since(start);

  start = Clock::now();
  JTSNE_ASSIGN_OR_RETURN(const ProbMatrix m_prime, s.SymmetricProbabilities(w_at_s));
  JTSNE_ASSIGN_OR_RETURN(const ProbMatrix m_at_t, Wire(m_prime, out.step_bytes[7]));
  out.step_seconds[7] = Since(start);

  start = Clock::now();
  JTSNE_RETURN_IF_ERROR(t.Embed(m_at_t));
  for (Participant& p : participants) {
    JTSNE_ASSIGN_OR_RETURN(const EmbeddingResult r, t.ResultFor(p.data().owner_id));
    JTSNE_ASSIGN_OR_RETURN(const EmbeddingResult r_at_p, Wire(r, out.step_bytes[8]));
    JTSNE_RETURN_IF_ERROR(p.ReceiveResult(r_at_p));
  }
  out.step_seconds[8] = Since(start);

  // Harness-only decryption of PK(D) for exactness checks.
  JTSNE_ASSIGN_OR_RETURN(
      std::vector<mpz_class> d_plain,
      kernels::DecryptAll(s.private_key_for_testing(), t.encrypted_distances()));
  JTSNE_ASSIGN_OR_RETURN(
      const ahe::FixedPointCodec codec,
      ahe::FixedPointCodec::Create(config.scale_bits, s.public_key().n()));
  for (auto& v : d_plain) v = codec.ToSigned(v);
  const size_t n = config.TotalPoints();
  out.distances_int = Matrix<mpz_class>(n, n, std::move(d_plain));
  out.m = t.probabilities();
  out.tsne = t.tsne();
  out.artifact = t.artifact();
  for (const Participant& p : participants) {
    out.participant_results.push_back(*p.result());
    out.participant_views.push_back(p.transcript());
  }
  out.s_view = s.transcript();
  out.t_view = t.transcript();
  out.ledger = t.ledger();
  out.unconverged_rows = s.unconverged_rows();
  return out;
}

}  // namespace jtsne::protocol
