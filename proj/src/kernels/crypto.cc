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

#include "jtsne/kernels/crypto.h"

#include <cstddef>
#include <optional>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace jtsne::kernels {

namespace {

// Runs `fn(i)` for i in [0, n) and gathers results; the first failing index
// (lowest i) determines the returned error.
template <typename T, typename Fn>
absl::StatusOr<std::vector<T>> MapIndices(size_t n, bool parallel, Fn fn) {
  std::vector<std::optional<absl::StatusOr<T>>> slots(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      slots[static_cast<size_t>(i)].emplace(fn(static_cast<size_t>(i)));
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      slots[static_cast<size_t>(i)].emplace(fn(static_cast<size_t>(i)));
    }
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& slot : slots) {
    if (!slot->ok()) return slot->status();
    out.push_back(std::move(**slot));
  }
  return out;
}

absl::StatusOr<std::vector<ahe::Ciphertext>> EncryptAllImpl(
    const ahe::PublicKey& pk, std::span<const mpz_class> plaintexts, int level,
    bool parallel) {
  return MapIndices<ahe::Ciphertext>(
      plaintexts.size(), parallel,
      [&](size_t i) { return pk.Encrypt(plaintexts[i], level); });
}

absl::StatusOr<std::vector<mpz_class>> DecryptAllImpl(
    const ahe::PrivateKey& sk, std::span<const ahe::Ciphertext> ciphertexts,
    bool parallel) {
  return MapIndices<mpz_class>(
      ciphertexts.size(), parallel,
      [&](size_t i) { return sk.Decrypt(ciphertexts[i]); });
}

absl::StatusOr<ahe::Ciphertext> CorrectPair(
    const ahe::PublicKey& pk, const ahe::Ciphertext& z,
    std::span<const ahe::Ciphertext> xi, std::span<const ahe::Ciphertext> xj,
    std::span<const mpz_class> sigma_i, std::span<const mpz_class> sigma_j,
    const mpz_class& data_bound) {
  mpz_class delta_sq_sum = 0;
  for (size_t k = 0; k < sigma_i.size(); ++k) {
    const mpz_class delta = sigma_i[k] - sigma_j[k];
    delta_sq_sum += delta * delta;
  }
  if (delta_sq_sum >= pk.half_modulus()) {
    return absl::OutOfRangeError("entry-noise correction exceeds n/2");
  }
  auto correction = pk.Encrypt(delta_sq_sum, /*level=*/2);
  if (!correction.ok()) return correction.status();
  for (size_t k = 0; k < sigma_i.size(); ++k) {
    const mpz_class twice_delta = 2 * (sigma_i[k] - sigma_j[k]);
    auto plus = pk.ScalarMul(twice_delta, xi[k], /*scalar_level=*/1, data_bound);
    if (!plus.ok()) return plus.status();
    auto minus = pk.ScalarMul(twice_delta, xj[k], /*scalar_level=*/1, data_bound);
    if (!minus.ok()) return minus.status();
    correction = pk.Add(*correction, *plus);
    if (!correction.ok()) return correction.status();
    correction = pk.Sub(*correction, *minus);
    if (!correction.ok()) return correction.status();
  }
  return pk.Sub(z, *correction);
}

absl::StatusOr<std::vector<ahe::Ciphertext>> RemoveEntryNoiseImpl(
    const ahe::PublicKey& pk, std::span<const ahe::Ciphertext> noised_distances,
    std::span<const ahe::Ciphertext> encrypted_data,
    const Matrix<mpz_class>& entry_noise, const mpz_class& data_bound,
    bool parallel) {
  const size_t n = entry_noise.rows();
  const size_t m = entry_noise.cols();
  if (noised_distances.size() != n * n || encrypted_data.size() != n * m) {
    return absl::InvalidArgumentError(absl::StrCat(
        "shape mismatch: ", noised_distances.size(), " distances, ",
        encrypted_data.size(), " data ciphertexts for N=", n, ", m=", m));
  }
  return MapIndices<ahe::Ciphertext>(n * n, parallel, [&](size_t idx) {
    const size_t i = idx / n;
    const size_t j = idx % n;
    return CorrectPair(pk, noised_distances[idx],
                       encrypted_data.subspan(i * m, m),
                       encrypted_data.subspan(j * m, m), entry_noise.row(i),
                       entry_noise.row(j), data_bound);
  });
}

}  // namespace

absl::StatusOr<std::vector<ahe::Ciphertext>> EncryptAll(
    const ahe::PublicKey& pk, std::span<const mpz_class> plaintexts,
    int level) {
  return EncryptAllImpl(pk, plaintexts, level, /*parallel=*/true);
}

absl::StatusOr<std::vector<mpz_class>> DecryptAll(
    const ahe::PrivateKey& sk, std::span<const ahe::Ciphertext> ciphertexts) {
  return DecryptAllImpl(sk, ciphertexts, /*parallel=*/true);
}

absl::StatusOr<std::vector<ahe::Ciphertext>> RemoveEntryNoise(
    const ahe::PublicKey& pk, std::span<const ahe::Ciphertext> noised_distances,
    std::span<const ahe::Ciphertext> encrypted_data,
    const Matrix<mpz_class>& entry_noise, const mpz_class& data_bound) {
  return RemoveEntryNoiseImpl(pk, noised_distances, encrypted_data, entry_noise,
                              data_bound, /*parallel=*/true);
}

namespace serial {

absl::StatusOr<std::vector<ahe::Ciphertext>> EncryptAll(
    const ahe::PublicKey& pk, std::span<const mpz_class> plaintexts,
    int level) {
  return EncryptAllImpl(pk, plaintexts, level, /*parallel=*/false);
}

absl::StatusOr<std::vector<mpz_class>> DecryptAll(
    const ahe::PrivateKey& sk, std::span<const ahe::Ciphertext> ciphertexts) {
  return DecryptAllImpl(sk, ciphertexts, /*parallel=*/false);
}

absl::StatusOr<std::vector<ahe::Ciphertext>> RemoveEntryNoise(
    const ahe::PublicKey& pk, std::span<const ahe::Ciphertext> noised_distances,
    std::span<const ahe::Ciphertext> encrypted_data,
    const Matrix<mpz_class>& entry_noise, const mpz_class& data_bound) {
  return RemoveEntryNoiseImpl(pk, noised_distances, encrypted_data, entry_noise,
                              data_bound, /*parallel=*/false);
}

}  // namespace serial
}  // namespace jtsne::kernels
