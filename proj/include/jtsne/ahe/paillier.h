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

#ifndef JTSNE_AHE_PAILLIER_H_
#define JTSNE_AHE_PAILLIER_H_

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "jtsne/common/bytes.h"
#include "json.hpp"

namespace jtsne::ahe {

inline constexpr int kMinKeyBits = 512;
inline constexpr int kTestKeyBits = 512;
inline constexpr int kDefaultKeyBits = 2048;

// Highest fixed-point level a ciphertext may carry. Raw data is level 1,
// squared quantities are level 2.
inline constexpr int kMaxLevel = 2;

// A Paillier ciphertext. `level` is public metadata recording the power of
// the fixed-point scale carried by the plaintext; it never reveals the value.
struct Ciphertext {
  mpz_class value;
  uint64_t key_id = 0;
  int level = 0;
};

// Paillier public key with generator g = n + 1. Supplies encryption and the
// three homomorphic operators: Add (∘), Sub (⋄) and ScalarMul (⋆).
class PublicKey {
 public:
  static absl::StatusOr<PublicKey> FromModulus(mpz_class n);
  // Parses {"n": hex, "g": hex}. Only g = n + 1 is accepted.
  static absl::StatusOr<PublicKey> FromJson(const nlohmann::json& j);

  const mpz_class& n() const { return n_; }
  const mpz_class& n_squared() const { return n_squared_; }
  mpz_class g() const { return n_ + 1; }
  // Largest non-negative plaintext that decodes as positive: (n - 1) / 2.
  const mpz_class& half_modulus() const { return half_; }
  uint64_t key_id() const { return key_id_; }
  int key_bits() const { return key_bits_; }

  // Encrypts ring element m in [0, n) with a fresh CSPRNG nonce.
  absl::StatusOr<Ciphertext> Encrypt(const mpz_class& m, int level) const;
  // Deterministic encryption with caller-supplied nonce r, gcd(r, n) = 1.
  absl::StatusOr<Ciphertext> EncryptWithNonce(const mpz_class& m, int level,
                                              const mpz_class& r) const;

  absl::StatusOr<Ciphertext> Add(const Ciphertext& a,
                                 const Ciphertext& b) const;
  absl::StatusOr<Ciphertext> Sub(const Ciphertext& a,
                                 const Ciphertext& b) const;
  // k ⋆ a. `k` is a signed integer; its fixed-point level is `scalar_level`
  // and the result carries a.level + scalar_level. When `operand_bound`
  // (an upper bound on |plaintext(a)|) is given, rejects products that could
  // reach n/2 and wrap.
  absl::StatusOr<Ciphertext> ScalarMul(
      const mpz_class& k, const Ciphertext& a, int scalar_level = 0,
      const std::optional<mpz_class>& operand_bound = std::nullopt) const;

  nlohmann::json ToJson() const;

  bool operator==(const PublicKey& other) const { return n_ == other.n_; }

 private:
  absl::Status CheckOperand(const Ciphertext& c) const;

  mpz_class n_;
  mpz_class n_squared_;
  mpz_class half_;
  uint64_t key_id_ = 0;
  int key_bits_ = 0;
};

// Decryption trapdoor. Uses CRT over p^2 and q^2.
class PrivateKey {
 public:
  PrivateKey() = default;
  PrivateKey(mpz_class p, mpz_class q);

  // Returns the plaintext ring element in [0, n).
  absl::StatusOr<mpz_class> Decrypt(const Ciphertext& c) const;
  uint64_t key_id() const { return key_id_; }

 private:
  mpz_class p_, q_, n_;
  mpz_class p_squared_, q_squared_;
  mpz_class hp_, hq_;
  mpz_class q_inverse_mod_p_;
  uint64_t key_id_ = 0;
};

struct KeyPair {
  PublicKey public_key;
  PrivateKey private_key;
  int key_bits() const { return public_key.key_bits(); }
};

// Generates a key pair with an exactly `key_bits`-bit modulus.
absl::StatusOr<KeyPair> GenerateKeyPair(int key_bits);

// Stable 64-bit identifier derived from the modulus (SHA-256 prefix).
uint64_t KeyIdForModulus(const mpz_class& n);

// Big-endian magnitude bytes of a non-negative integer.
std::string MpzToBytes(const mpz_class& v);
mpz_class MpzFromBytes(std::string_view bytes);
std::string MpzToHex(const mpz_class& v);
absl::StatusOr<mpz_class> MpzFromHex(std::string_view hex);

// Ciphertext wire form: u32 big-endian length followed by the big-endian
// magnitude of the ciphertext value.
void AppendCiphertextValue(ByteWriter& writer, const mpz_class& value);
absl::StatusOr<mpz_class> ReadCiphertextValue(ByteReader& reader);

}  // namespace jtsne::ahe

#endif  // JTSNE_AHE_PAILLIER_H_
