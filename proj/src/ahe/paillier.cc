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

#include "jtsne/ahe/paillier.h"

#include <openssl/sha.h>

#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/ahe/random.h"
#include "jtsne/common/status_macros.h"

namespace jtsne::ahe {

namespace {

// L(x) = (x - 1) / d
mpz_class LFunction(const mpz_class& x, const mpz_class& d) {
  mpz_class out = x - 1;
  mpz_divexact(out.get_mpz_t(), out.get_mpz_t(), d.get_mpz_t());
  return out;
}

mpz_class PowMod(const mpz_class& base, const mpz_class& exp,
                 const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

mpz_class Invert(const mpz_class& v, const mpz_class& mod) {
  mpz_class out;
  mpz_invert(out.get_mpz_t(), v.get_mpz_t(), mod.get_mpz_t());
  return out;
}

// Random prime with exactly `bits` bits and the two top bits set, so the
// product of two such primes has exactly 2 * bits bits.
mpz_class RandomPrime(int bits) {
  for (;;) {
    mpz_class candidate = SecureRandomBits(bits);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    mpz_class prime;
    mpz_nextprime(prime.get_mpz_t(), candidate.get_mpz_t());
    if (mpz_sizeinbase(prime.get_mpz_t(), 2) != static_cast<size_t>(bits)) {
      continue;
    }
    if (mpz_probab_prime_p(prime.get_mpz_t(), 40) == 0) continue;
    return prime;
  }
}

}  // namespace

std::string MpzToBytes(const mpz_class& v) {
  if (v == 0) return std::string();
  const size_t n = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  std::string out(n, '\0');
  size_t written = 0;
  mpz_export(out.data(), &written, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(written);
  return out;
}

mpz_class MpzFromBytes(std::string_view bytes) {
  mpz_class v;
  if (!bytes.empty()) {
    mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  }
  return v;
}

std::string MpzToHex(const mpz_class& v) { return v.get_str(16); }

absl::StatusOr<mpz_class> MpzFromHex(std::string_view hex) {
  mpz_class v;
  if (hex.empty() ||
      mpz_set_str(v.get_mpz_t(), std::string(hex).c_str(), 16) != 0) {
    return absl::InvalidArgumentError("malformed hex integer");
  }
  return v;
}

uint64_t KeyIdForModulus(const mpz_class& n) {
  const std::string bytes = MpzToBytes(n);
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(),
         digest);
  uint64_t id = 0;
  for (int i = 0; i < 8; ++i) id = (id << 8) | digest[i];
  return id;
}

void AppendCiphertextValue(ByteWriter& writer, const mpz_class& value) {
  writer.PutBlob(MpzToBytes(value));
}

absl::StatusOr<mpz_class> ReadCiphertextValue(ByteReader& reader) {
  JTSNE_ASSIGN_OR_RETURN(std::string_view raw, reader.GetBlob());
  return MpzFromBytes(raw);
}

absl::StatusOr<PublicKey> PublicKey::FromModulus(mpz_class n) {
  if (n <= 3 || mpz_even_p(n.get_mpz_t())) {
    return absl::InvalidArgumentError("modulus must be an odd integer > 3");
  }
  PublicKey pk;
  pk.n_ = std::move(n);
  pk.n_squared_ = pk.n_ * pk.n_;
  pk.half_ = (pk.n_ - 1) / 2;
  pk.key_bits_ = static_cast<int>(mpz_sizeinbase(pk.n_.get_mpz_t(), 2));
  pk.key_id_ = KeyIdForModulus(pk.n_);
  return pk;
}

absl::StatusOr<PublicKey> PublicKey::FromJson(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("g") ||
      !j["n"].is_string() || !j["g"].is_string()) {
    return absl::InvalidArgumentError("public key JSON needs string n and g");
  }
  JTSNE_ASSIGN_OR_RETURN(mpz_class n, MpzFromHex(j["n"].get<std::string>()));
  JTSNE_ASSIGN_OR_RETURN(mpz_class g, MpzFromHex(j["g"].get<std::string>()));
  if (g != n + 1) {
    return absl::InvalidArgumentError("only generator g = n + 1 is supported");
  }
  return FromModulus(std::move(n));
}

nlohmann::json PublicKey::ToJson() const {
  return {{"n", MpzToHex(n_)}, {"g", MpzToHex(g())}};
}

absl::Status PublicKey::CheckOperand(const Ciphertext& c) const {
  if (c.key_id != key_id_) {
    return absl::InvalidArgumentError(
        absl::StrCat("ciphertext key mismatch: ", c.key_id, " vs ", key_id_));
  }
  if (c.level < 0 || c.level > kMaxLevel) {
    return absl::InvalidArgumentError(
        absl::StrCat("ciphertext level ", c.level, " out of range"));
  }
  return absl::OkStatus();
}

absl::StatusOr<Ciphertext> PublicKey::EncryptWithNonce(
    const mpz_class& m, int level, const mpz_class& r) const {
  if (m < 0 || m >= n_) {
    return absl::InvalidArgumentError("plaintext outside [0, n)");
  }
  if (level < 0 || level > kMaxLevel) {
    return absl::InvalidArgumentError(absl::StrCat("bad level ", level));
  }
  // g^m = (1 + n)^m = 1 + m n  (mod n^2)
  mpz_class gm = (1 + m * n_) % n_squared_;
  mpz_class c = (gm * PowMod(r, n_, n_squared_)) % n_squared_;
  return Ciphertext{std::move(c), key_id_, level};
}

absl::StatusOr<Ciphertext> PublicKey::Encrypt(const mpz_class& m,
                                              int level) const {
  mpz_class r;
  mpz_class g;
  do {
    r = SecureRandomBelow(n_);
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), n_.get_mpz_t());
  } while (r == 0 || g != 1);
  return EncryptWithNonce(m, level, r);
}

absl::StatusOr<Ciphertext> PublicKey::Add(const Ciphertext& a,
                                          const Ciphertext& b) const {
  JTSNE_RETURN_IF_ERROR(CheckOperand(a));
  JTSNE_RETURN_IF_ERROR(CheckOperand(b));
  if (a.level != b.level) {
    return absl::FailedPreconditionError(absl::StrCat(
        "fixed-point level mismatch in add: ", a.level, " vs ", b.level));
  }
  return Ciphertext{(a.value * b.value) % n_squared_, key_id_, a.level};
}

absl::StatusOr<Ciphertext> PublicKey::Sub(const Ciphertext& a,
                                          const Ciphertext& b) const {
  JTSNE_RETURN_IF_ERROR(CheckOperand(a));
  JTSNE_RETURN_IF_ERROR(CheckOperand(b));
  if (a.level != b.level) {
    return absl::FailedPreconditionError(absl::StrCat(
        "fixed-point level mismatch in sub: ", a.level, " vs ", b.level));
  }
  return Ciphertext{(a.value * Invert(b.value, n_squared_)) % n_squared_,
                    key_id_, a.level};
}

absl::StatusOr<Ciphertext> PublicKey::ScalarMul(
    const mpz_class& k, const Ciphertext& a, int scalar_level,
    const std::optional<mpz_class>& operand_bound) const {
  JTSNE_RETURN_IF_ERROR(CheckOperand(a));
  const int level = a.level + scalar_level;
  if (scalar_level < 0 || level > kMaxLevel) {
    return absl::FailedPreconditionError(
        absl::StrCat("scalar multiplication would reach level ", level));
  }
  mpz_class magnitude = abs(k);
  if (operand_bound.has_value() && magnitude * (*operand_bound) > half_) {
    return absl::OutOfRangeError(
        "scalar multiplication exceeds the plaintext magnitude budget");
  }
  if (magnitude >= n_) magnitude %= n_;
  if (k >= 0) {
    return Ciphertext{PowMod(a.value, magnitude, n_squared_), key_id_, level};
  }
  return Ciphertext{
      PowMod(Invert(a.value, n_squared_), magnitude, n_squared_), key_id_,
      level};
}

PrivateKey::PrivateKey(mpz_class p, mpz_class q)
    : p_(std::move(p)), q_(std::move(q)) {
  n_ = p_ * q_;
  p_squared_ = p_ * p_;
  q_squared_ = q_ * q_;
  const mpz_class g = n_ + 1;
  hp_ = Invert(LFunction(PowMod(g, p_ - 1, p_squared_), p_), p_);
  hq_ = Invert(LFunction(PowMod(g, q_ - 1, q_squared_), q_), q_);
  q_inverse_mod_p_ = Invert(q_, p_);
  key_id_ = KeyIdForModulus(n_);
}

absl::StatusOr<mpz_class> PrivateKey::Decrypt(const Ciphertext& c) const {
  if (c.key_id != key_id_) {
    return absl::InvalidArgumentError("ciphertext was made under another key");
  }
  if (c.value <= 0 || c.value >= n_ * n_) {
    return absl::InvalidArgumentError("ciphertext outside Z*_{n^2}");
  }
  mpz_class mp = (LFunction(PowMod(c.value, p_ - 1, p_squared_), p_) * hp_) % p_;
  mpz_class mq = (LFunction(PowMod(c.value, q_ - 1, q_squared_), q_) * hq_) % q_;
  // CRT: m = mq + q * ((mp - mq) * q^-1 mod p)
  mpz_class h = ((mp - mq) * q_inverse_mod_p_) % p_;
  if (h < 0) h += p_;
  return mq + q_ * h;
}

absl::StatusOr<KeyPair> GenerateKeyPair(int key_bits) {
  if (key_bits < kMinKeyBits) {
    return absl::InvalidArgumentError(absl::StrCat(
        "key_bits must be at least ", kMinKeyBits, ", got ", key_bits));
  }
  if (key_bits % 2 != 0) {
    return absl::InvalidArgumentError("key_bits must be even");
  }
  for (;;) {
    mpz_class p = RandomPrime(key_bits / 2);
    mpz_class q = RandomPrime(key_bits / 2);
    if (p == q) continue;
    mpz_class n = p * q;
    mpz_class phi = (p - 1) * (q - 1);
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
    if (g != 1) continue;
    JTSNE_ASSIGN_OR_RETURN(PublicKey pk, PublicKey::FromModulus(n));
    return KeyPair{std::move(pk), PrivateKey(std::move(p), std::move(q))};
  }
}

}  // namespace jtsne::ahe
