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

#ifndef JTSNE_PROTOCOL_ROLES_H_
#define JTSNE_PROTOCOL_ROLES_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/aggregate/artifact.h"
#include "jtsne/ahe/fixed_point.h"
#include "jtsne/ahe/paillier.h"
#include "jtsne/embedding/affinities.h"
#include "jtsne/embedding/tsne.h"
#include "jtsne/protocol/messages.h"
#include "jtsne/protocol/transcript.h"
#include "jtsne/protocol/types.h"

namespace jtsne::protocol {

// Deliberate protocol deviations, used to check that the audit notices.
struct FaultInjection {
  bool skip_entry_noise = false;      // Step 3 adds sigma = 0
  bool identity_permutation = false;  // Step 6 uses pi = id
  bool zero_row_noise = false;        // Step 6 uses eta = 0
};

// A data owner. Sees its own data and the final artifact only.
class Participant {
 public:
  Participant(Dataset data, bool audit);

  // Step 2: encrypt local rows under the broadcast key.
  absl::StatusOr<DataUpload> EncryptUpload(const KeyBroadcast& key);
  absl::Status ReceiveResult(const EmbeddingResult& result);

  const Dataset& data() const { return data_; }
  const std::optional<aggregate::EmbeddingArtifact>& result() const {
    return result_;
  }
  const ViewTranscript& transcript() const { return transcript_; }

 private:
  Dataset data_;
  ViewTranscript transcript_;
  std::optional<aggregate::EmbeddingArtifact> result_;
};

// Key holder. Sees noised data and blinded, permuted distances.
class CollaboratorS {
 public:
  CollaboratorS(TaskConfig config, bool audit);

  // Step 1. Uses `keys` when given (tests reuse one key pair), otherwise
  // generates a fresh pair of config.key_bits.
  absl::StatusOr<KeyBroadcast> KeyGenBroadcast(
      std::optional<ahe::KeyPair> keys = std::nullopt);
  // Step 4: decrypt x-bar, form z_ij in level-2 integers, re-encrypt.
  absl::StatusOr<NoisedDistances> NoisedDistanceMatrix(const NoisedData& in);
  // Step 7: decrypt W', shift each row by its off-diagonal minimum in
  // integers, calibrate and symmetrize.
  absl::StatusOr<ProbMatrix> SymmetricProbabilities(const BlindedDistances& in);

  const ViewTranscript& transcript() const { return transcript_; }
  const TaskConfig& config() const { return config_; }
  const ahe::PublicKey& public_key() const { return keys_->public_key; }
  // Test harness access only.
  const ahe::PrivateKey& private_key_for_testing() const {
    return keys_->private_key;
  }
  int unconverged_rows() const { return unconverged_rows_; }

 private:
  absl::StatusOr<Matrix<mpz_class>> DecryptSigned(
      const CiphertextMatrix& m) const;

  TaskConfig config_;
  ViewTranscript transcript_;
  std::optional<ahe::KeyPair> keys_;
  std::optional<ahe::FixedPointCodec> codec_;
  int unconverged_rows_ = 0;
};

// Computation server. Holds ciphertexts and the noise ledger, never the
// private key.
class CollaboratorT {
 public:
  explicit CollaboratorT(bool audit, FaultInjection faults = {});

  absl::Status ReceiveKey(const KeyBroadcast& key);
  absl::Status ReceiveUpload(const DataUpload& upload);
  bool AllUploaded() const;

  // Step 3: PK(x-bar) = PK(x) o PK(sigma).
  absl::StatusOr<NoisedData> AddEntryNoise();
  // Step 5: PK(D) from PK(Z), PK(X) and the ledger.
  absl::Status RemoveEntryNoise(const NoisedDistances& z);
  // Step 6: add eta_i off the diagonal of row i, then conjugate by pi.
  absl::StatusOr<BlindedDistances> BlindAndPermute();
  // Step 8: unpermute M', run t-SNE, build the artifact.
  absl::Status Embed(const ProbMatrix& m_prime);
  // The artifact as `owner` may see it.
  absl::StatusOr<EmbeddingResult> ResultFor(const std::string& owner) const;

  const TaskConfig& config() const { return config_; }
  const ViewTranscript& transcript() const { return transcript_; }
  const NoiseLedger& ledger() const { return ledger_; }
  const std::vector<ahe::Ciphertext>& encrypted_distances() const {
    return encrypted_distances_;
  }
  const embedding::ProbabilityMatrix& probabilities() const { return m_; }
  const embedding::TsneResult& tsne() const { return tsne_; }
  const aggregate::EmbeddingArtifact& artifact() const { return *artifact_; }
  bool complete() const { return artifact_.has_value(); }

 private:
  TaskConfig config_;
  ViewTranscript transcript_;
  FaultInjection faults_;
  std::optional<ahe::PublicKey> pk_;
  std::optional<ahe::FixedPointCodec> codec_;
  std::map<std::string, DataUpload> uploads_;
  std::vector<ahe::Ciphertext> encrypted_data_;  // N x m, global order
  std::vector<std::string> owner_of_;
  std::vector<std::optional<std::string>> labels_;
  NoiseLedger ledger_;
  std::vector<ahe::Ciphertext> encrypted_distances_;
  embedding::ProbabilityMatrix m_;
  embedding::TsneResult tsne_;
  std::optional<aggregate::EmbeddingArtifact> artifact_;
};

}  // namespace jtsne::protocol

#endif  // JTSNE_PROTOCOL_ROLES_H_
