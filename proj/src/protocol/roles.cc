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

#include "jtsne/protocol/roles.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/ahe/random.h"
#include "jtsne/common/status_macros.h"
#include "jtsne/kernels/crypto.h"
#include "jtsne/kernels/distance.h"

namespace jtsne::protocol {

namespace {

absl::Status CheckMatrix(const CiphertextMatrix& m, size_t rows, size_t cols,
                         int level, const ahe::PublicKey& pk,
                         std::string_view what) {
  if (m.rows != rows || m.cols != cols || m.values.size() != rows * cols) {
    return absl::InvalidArgumentError(
        absl::StrCat(std::string(what), ": expected ", rows, "x", cols,
                     " ciphertexts, got ", m.rows, "x", m.cols));
  }
  if (m.level != level) {
    return absl::FailedPreconditionError(
        absl::StrCat(std::string(what), ": expected level ", level, ", got ",
                     m.level));
  }
  if (m.key_id != pk.key_id()) {
    return absl::InvalidArgumentError(
        absl::StrCat(std::string(what), ": encrypted under a different key"));
  }
  return absl::OkStatus();
}

// floor(x * 2^bits) as an integer; x >= 0.
mpz_class FloorScaled(double x, int bits) {
  mpz_class v(std::floor(std::ldexp(x, bits)));
  return v;
}

}  // namespace

// ---------------------------------------------------------------- Participant

Participant::Participant(Dataset data, bool audit)
    : data_(std::move(data)),
      transcript_(absl::StrCat("participant:", data_.owner_id), audit) {}

absl::StatusOr<DataUpload> Participant::EncryptUpload(const KeyBroadcast& key) {
  const TaskConfig& config = key.config;
  JTSNE_RETURN_IF_ERROR(data_.Validate(config.dims));
  const auto spec = std::find_if(
      config.participants.begin(), config.participants.end(),
      [&](const ParticipantSpec& p) { return p.id == data_.owner_id; });
  if (spec == config.participants.end()) {
    return absl::PermissionDeniedError(
        absl::StrCat(data_.owner_id, " is not on the task roster"));
  }
  if (spec->count != data_.points.rows()) {
    return absl::InvalidArgumentError(
        absl::StrCat(data_.owner_id, ": task expects ", spec->count,
                     " points, data has ", data_.points.rows()));
  }
  auto normalized = config.Normalize(data_.points);
  if (!normalized.ok()) {
    return absl::Status(normalized.status().code(),
                        absl::StrCat(data_.owner_id, ": ", normalized.status().message()));
  }
  const RealMatrix& points = *normalized;
  for (size_t i = 0; i < points.size(); ++i) {
    if (std::abs(points.data()[i]) > config.value_bound) {
      return absl::OutOfRangeError(absl::StrCat(
          data_.owner_id, ": value ", points.data()[i], " in row ",
          i / config.dims, " exceeds the overflow budget bound ",
          config.value_bound));
    }
  }
  JTSNE_ASSIGN_OR_RETURN(const ahe::PublicKey pk,
                         ahe::PublicKey::FromJson(key.public_key));
  JTSNE_ASSIGN_OR_RETURN(const ahe::FixedPointCodec codec,
                         ahe::FixedPointCodec::Create(config.scale_bits, pk.n()));
  std::vector<mpz_class> plain;
  plain.reserve(data_.points.size());
  for (double v : points.data()) {
    JTSNE_ASSIGN_OR_RETURN(mpz_class e, codec.Encode(v, 1));
    plain.push_back(std::move(e));
  }
  JTSNE_ASSIGN_OR_RETURN(auto cts, kernels::EncryptAll(pk, plain, 1));
  transcript_.RecordReals(2, kOwnInput, "data", data_.points);

  DataUpload upload;
  upload.owner_id = data_.owner_id;
  JTSNE_ASSIGN_OR_RETURN(upload.rows,
                         CiphertextMatrix::From(data_.points.rows(),
                                                config.dims, cts));
  if (config.mode == VisualizationMode::kScatterplot) upload.labels = data_.labels;
  return upload;
}

absl::Status Participant::ReceiveResult(const EmbeddingResult& result) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(result.artifact_json);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("result: ", e.what()));
  }
  JTSNE_ASSIGN_OR_RETURN(aggregate::EmbeddingArtifact artifact,
                         aggregate::EmbeddingArtifact::FromJson(j));
  if (artifact.viewer != data_.owner_id) {
    return absl::PermissionDeniedError("result was rendered for another owner");
  }
  RealMatrix visible(artifact.points.size(), 2);
  for (size_t i = 0; i < artifact.points.size(); ++i) {
    visible(i, 0) = artifact.points[i].x;
    visible(i, 1) = artifact.points[i].y;
  }
  transcript_.RecordReals(8, kResult, "embedding", visible);
  result_ = std::move(artifact);
  return absl::OkStatus();
}

// -------------------------------------------------------------- CollaboratorS

CollaboratorS::CollaboratorS(TaskConfig config, bool audit)
    : config_(std::move(config)), transcript_("collaborator:S", audit) {}

absl::StatusOr<KeyBroadcast> CollaboratorS::KeyGenBroadcast(
    std::optional<ahe::KeyPair> keys) {
  JTSNE_RETURN_IF_ERROR(config_.Validate());
  if (keys.has_value()) {
    if (keys->key_bits() != config_.key_bits) {
      return absl::InvalidArgumentError(
          absl::StrCat("supplied key has ", keys->key_bits(),
                       " bits, task expects ", config_.key_bits));
    }
    keys_ = std::move(keys);
  } else {
    JTSNE_ASSIGN_OR_RETURN(ahe::KeyPair kp, ahe::GenerateKeyPair(config_.key_bits));
    keys_ = std::move(kp);
  }
  JTSNE_ASSIGN_OR_RETURN(
      ahe::FixedPointCodec codec,
      ahe::FixedPointCodec::Create(config_.scale_bits, keys_->public_key.n()));
  codec_ = std::move(codec);
  return KeyBroadcast{keys_->public_key.ToJson(), config_};
}

absl::StatusOr<Matrix<mpz_class>> CollaboratorS::DecryptSigned(
    const CiphertextMatrix& m) const {
  const std::vector<ahe::Ciphertext> cts = m.ToCiphertexts();
  JTSNE_ASSIGN_OR_RETURN(std::vector<mpz_class> plain,
                         kernels::DecryptAll(keys_->private_key, cts));
  for (auto& v : plain) v = codec_->ToSigned(v);
  return Matrix<mpz_class>(m.rows, m.cols, std::move(plain));
}

absl::StatusOr<NoisedDistances> CollaboratorS::NoisedDistanceMatrix(
    const NoisedData& in) {
  if (!keys_) return absl::FailedPreconditionError("step 1 has not run");
  const size_t n = config_.TotalPoints();
  JTSNE_RETURN_IF_ERROR(
      CheckMatrix(in.matrix, n, config_.dims, 1, keys_->public_key, "NoisedData"));
  JTSNE_ASSIGN_OR_RETURN(const Matrix<mpz_class> noised,
                         DecryptSigned(in.matrix));
  transcript_.RecordIntegers(4, kDecrypted, "noised_data", noised);

  const Matrix<mpz_class> z = kernels::SquaredDistances(noised);
  for (const auto& v : z.data()) {
    if (v > keys_->public_key.half_modulus()) {
      return absl::OutOfRangeError("noised distance exceeds the plaintext ring");
    }
  }
  JTSNE_ASSIGN_OR_RETURN(auto cts, kernels::EncryptAll(keys_->public_key,
                                                       z.data(), /*level=*/2));
  JTSNE_ASSIGN_OR_RETURN(CiphertextMatrix out, CiphertextMatrix::From(n, n, cts));
  return NoisedDistances{std::move(out)};
}

absl::StatusOr<ProbMatrix> CollaboratorS::SymmetricProbabilities(
    const BlindedDistances& in) {
  if (!keys_) return absl::FailedPreconditionError("step 1 has not run");
  const size_t n = config_.TotalPoints();
  JTSNE_RETURN_IF_ERROR(CheckMatrix(in.matrix, n, n, 2, keys_->public_key,
                                    "BlindedDistances"));
  JTSNE_ASSIGN_OR_RETURN(const Matrix<mpz_class> w, DecryptSigned(in.matrix));
  transcript_.RecordIntegers(7, kDecrypted, "blinded_distances", w);

  // The row noise is constant off the diagonal, so subtracting the row
  // minimum in integers removes it exactly before anything is rounded.
  RealMatrix shifted(n, n, 0.0);
  for (size_t a = 0; a < n; ++a) {
    if (w(a, a) != 0) {
      return absl::FailedPreconditionError(
          absl::StrCat("blinded distance diagonal entry ", a, " is not zero"));
    }
    const mpz_class* min = nullptr;
    for (size_t b = 0; b < n; ++b) {
      if (b != a && (min == nullptr || w(a, b) < *min)) min = &w(a, b);
    }
    for (size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      shifted(a, b) = codec_->ScaledToReal(w(a, b) - *min, 2);
    }
  }
  JTSNE_ASSIGN_OR_RETURN(
      embedding::CalibratedConditionals cal,
      embedding::CalibrateConditionals(shifted, config_.tsne.perplexity));
  unconverged_rows_ = cal.unconverged_rows;
  JTSNE_ASSIGN_OR_RETURN(embedding::ProbabilityMatrix p,
                         embedding::Symmetrize(cal.conditional));
  return ProbMatrix{std::move(p.values)};
}

// -------------------------------------------------------------- CollaboratorT

CollaboratorT::CollaboratorT(bool audit, FaultInjection faults)
    : transcript_("collaborator:T", audit), faults_(faults) {}

absl::Status CollaboratorT::ReceiveKey(const KeyBroadcast& key) {
  JTSNE_RETURN_IF_ERROR(key.config.Validate());
  JTSNE_ASSIGN_OR_RETURN(ahe::PublicKey pk, ahe::PublicKey::FromJson(key.public_key));
  if (pk.key_bits() < key.config.key_bits - 1) {
    return absl::InvalidArgumentError("public key is smaller than configured");
  }
  JTSNE_RETURN_IF_ERROR(key.config.CheckOverflowBudget(pk.key_bits()));
  JTSNE_ASSIGN_OR_RETURN(ahe::FixedPointCodec codec,
                         ahe::FixedPointCodec::Create(key.config.scale_bits, pk.n()));
  config_ = key.config;
  pk_ = std::move(pk);
  codec_ = std::move(codec);
  return absl::OkStatus();
}

absl::Status CollaboratorT::ReceiveUpload(const DataUpload& upload) {
  if (!pk_) return absl::FailedPreconditionError("no public key yet");
  const auto spec = std::find_if(
      config_.participants.begin(), config_.participants.end(),
      [&](const ParticipantSpec& p) { return p.id == upload.owner_id; });
  if (spec == config_.participants.end()) {
    return absl::PermissionDeniedError(
        absl::StrCat(upload.owner_id, " is not on the task roster"));
  }
  if (uploads_.contains(upload.owner_id)) {
    return absl::AlreadyExistsError(
        absl::StrCat(upload.owner_id, " already uploaded"));
  }
  if (upload.rows.cols != config_.dims) {
    return absl::InvalidArgumentError(
        absl::StrCat(upload.owner_id, ": upload has dimension ", upload.rows.cols,
                     " but the task expects dimension ", config_.dims));
  }
  JTSNE_RETURN_IF_ERROR(CheckMatrix(upload.rows, spec->count, config_.dims, 1,
                                    *pk_, "DataUpload"));
  if (!upload.labels.empty() && upload.labels.size() != spec->count) {
    return absl::InvalidArgumentError("label count does not match row count");
  }
  uploads_.emplace(upload.owner_id, upload);
  return absl::OkStatus();
}

bool CollaboratorT::AllUploaded() const {
  return pk_.has_value() && uploads_.size() == config_.participants.size();
}

absl::StatusOr<NoisedData> CollaboratorT::AddEntryNoise() {
  if (!AllUploaded()) {
    return absl::FailedPreconditionError(
        absl::StrCat("waiting for uploads: ", uploads_.size(), " of ",
                     config_.participants.size()));
  }
  const size_t n = config_.TotalPoints();
  const size_t m = config_.dims;
  encrypted_data_.clear();
  owner_of_.clear();
  labels_.clear();
  for (const auto& spec : config_.participants) {
    const DataUpload& up = uploads_.at(spec.id);
    auto cts = up.rows.ToCiphertexts();
    encrypted_data_.insert(encrypted_data_.end(), cts.begin(), cts.end());
    for (size_t i = 0; i < spec.count; ++i) {
      owner_of_.push_back(spec.id);
      labels_.push_back(up.labels.empty() ? std::nullopt : up.labels[i]);
    }
  }

  ahe::NoiseRng rng(config_.noise_seed);
  const mpz_class range = FloorScaled(config_.EffectiveSigmaRange(), config_.scale_bits);
  ledger_.sigma = Matrix<mpz_class>(n, m, mpz_class(0));
  std::vector<mpz_class> sigma_ring(n * m);
  for (size_t idx = 0; idx < n * m; ++idx) {
    mpz_class s = 0;
    if (!faults_.skip_entry_noise) {
      while (s == 0) s = rng.Below(2 * range + 1) - range;
    }
    ledger_.sigma.data()[idx] = s;
    JTSNE_ASSIGN_OR_RETURN(sigma_ring[idx], codec_->ToRing(s));
  }
  JTSNE_ASSIGN_OR_RETURN(auto enc_sigma, kernels::EncryptAll(*pk_, sigma_ring, 1));
  std::vector<ahe::Ciphertext> noised(n * m);
  for (size_t idx = 0; idx < n * m; ++idx) {
    JTSNE_ASSIGN_OR_RETURN(noised[idx], pk_->Add(encrypted_data_[idx], enc_sigma[idx]));
  }
  JTSNE_ASSIGN_OR_RETURN(CiphertextMatrix out, CiphertextMatrix::From(n, m, noised));
  return NoisedData{std::move(out)};
}

absl::Status CollaboratorT::RemoveEntryNoise(const NoisedDistances& z) {
  const size_t n = config_.TotalPoints();
  if (ledger_.sigma.rows() != n) {
    return absl::FailedPreconditionError("step 3 has not run");
  }
  JTSNE_RETURN_IF_ERROR(CheckMatrix(z.matrix, n, n, 2, *pk_, "NoisedDistances"));
  const mpz_class data_bound =
      FloorScaled(config_.value_bound, config_.scale_bits) + 1;
  JTSNE_ASSIGN_OR_RETURN(
      encrypted_distances_,
      kernels::RemoveEntryNoise(*pk_, z.matrix.ToCiphertexts(), encrypted_data_,
                                ledger_.sigma, data_bound));
  return absl::OkStatus();
}

absl::StatusOr<BlindedDistances> CollaboratorT::BlindAndPermute() {
  const size_t n = config_.TotalPoints();
  if (encrypted_distances_.size() != n * n) {
    return absl::FailedPreconditionError("step 5 has not run");
  }
  // Seeded runs use a stream independent of the sigma draw.
  ahe::NoiseRng rng(config_.noise_seed.has_value()
                        ? std::optional<uint64_t>(*config_.noise_seed ^
                                                  0x9e3779b97f4a7c15ull)
                        : std::nullopt);
  const mpz_class range = FloorScaled(config_.EffectiveEtaRange(),
                                      2 * config_.scale_bits);
  ledger_.eta.assign(n, mpz_class(0));
  if (!faults_.zero_row_noise) {
    for (auto& e : ledger_.eta) e = rng.Below(range + 1);
  }
  ledger_.pi.resize(n);
  std::iota(ledger_.pi.begin(), ledger_.pi.end(), size_t{0});
  if (!faults_.identity_permutation) {
    std::shuffle(ledger_.pi.begin(), ledger_.pi.end(), rng);
  }
  JTSNE_ASSIGN_OR_RETURN(auto enc_eta, kernels::EncryptAll(*pk_, ledger_.eta, 2));

  std::vector<ahe::Ciphertext> w(n * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) {
        w[i * n + j] = encrypted_distances_[i * n + j];
      } else {
        JTSNE_ASSIGN_OR_RETURN(w[i * n + j],
                               pk_->Add(encrypted_distances_[i * n + j], enc_eta[i]));
      }
    }
  }
  std::vector<ahe::Ciphertext> permuted(n * n);
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = 0; b < n; ++b) {
      permuted[a * n + b] = w[ledger_.pi[a] * n + ledger_.pi[b]];
    }
  }
  JTSNE_ASSIGN_OR_RETURN(CiphertextMatrix out, CiphertextMatrix::From(n, n, permuted));
  return BlindedDistances{std::move(out)};
}

absl::Status CollaboratorT::Embed(const ProbMatrix& m_prime) {
  const size_t n = config_.TotalPoints();
  if (ledger_.pi.size() != n) return absl::FailedPreconditionError("step 6 has not run");
  if (m_prime.values.rows() != n || m_prime.values.cols() != n) {
    return absl::InvalidArgumentError("probability matrix has the wrong shape");
  }
  transcript_.RecordReals(8, kReceivedPlaintext, "prob_matrix", m_prime.values);
  m_ = {ConjugateUnpermute(m_prime.values, ledger_.pi),
        embedding::ProbabilityKind::kSymmetric};
  JTSNE_ASSIGN_OR_RETURN(tsne_, embedding::RunTsne(m_, config_.tsne));
  std::vector<std::string> owners;
  for (const auto& p : config_.participants) owners.push_back(p.id);
  JTSNE_ASSIGN_OR_RETURN(
      aggregate::EmbeddingArtifact artifact,
      aggregate::ExportArtifact(config_.task_id, tsne_.y, owners, owner_of_,
                                labels_, config_.mode));
  artifact_ = std::move(artifact);
  return absl::OkStatus();
}

absl::StatusOr<EmbeddingResult> CollaboratorT::ResultFor(
    const std::string& owner) const {
  if (!artifact_) return absl::FailedPreconditionError("embedding not ready");
  if (std::none_of(config_.participants.begin(), config_.participants.end(),
                   [&](const ParticipantSpec& p) { return p.id == owner; })) {
    return absl::PermissionDeniedError(
        absl::StrCat(owner, " is not a participant"));
  }
  return EmbeddingResult{aggregate::ViewFor(*artifact_, owner).ToJson().dump()};
}

}  // namespace jtsne::protocol
