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

#ifndef JTSNE_KERNELS_CRYPTO_H_
#define JTSNE_KERNELS_CRYPTO_H_

#include <gmpxx.h>

#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/ahe/paillier.h"
#include "jtsne/common/matrix.h"

// Bulk Paillier work. Every entry is independent, so the default versions
// split the index range across OpenMP threads; the serial:: versions are the
// reference the parallel ones are tested against.
namespace jtsne::kernels {

absl::StatusOr<std::vector<ahe::Ciphertext>> EncryptAll(
    const ahe::PublicKey& pk, std::span<const mpz_class> plaintexts, int level);

absl::StatusOr<std::vector<mpz_class>> DecryptAll(
    const ahe::PrivateKey& sk, std::span<const ahe::Ciphertext> ciphertexts);

// Strips entry noise from encrypted noised squared distances:
//   PK(d_ij^2) = PK(z_ij) ⋄ Σ_k (PK(δ_ijk^2) ∘ 2δ_ijk ⋆ PK(x_ik)
//                                ⋄ 2δ_ijk ⋆ PK(x_jk)),
// with δ_ijk = σ_ik - σ_jk. The per-pair δ^2 terms are summed in the clear
// and encrypted once. `entry_noise` holds σ as signed level-1 integers and
// `data_bound` bounds |x| at level 1 for the overflow guard.
absl::StatusOr<std::vector<ahe::Ciphertext>> RemoveEntryNoise(
    const ahe::PublicKey& pk, std::span<const ahe::Ciphertext> noised_distances,
    std::span<const ahe::Ciphertext> encrypted_data,
    const Matrix<mpz_class>& entry_noise, const mpz_class& data_bound);

namespace serial {

absl::StatusOr<std::vector<ahe::Ciphertext>> EncryptAll(
    const ahe::PublicKey& pk, std::span<const mpz_class> plaintexts, int level);

absl::StatusOr<std::vector<mpz_class>> DecryptAll(
    const ahe::PrivateKey& sk, std::span<const ahe::Ciphertext> ciphertexts);

absl::StatusOr<std::vector<ahe::Ciphertext>> RemoveEntryNoise(
    const ahe::PublicKey& pk, std::span<const ahe::Ciphertext> noised_distances,
    std::span<const ahe::Ciphertext> encrypted_data,
    const Matrix<mpz_class>& entry_noise, const mpz_class& data_bound);

}  // namespace serial
}  // namespace jtsne::kernels

#endif  // JTSNE_KERNELS_CRYPTO_H_
