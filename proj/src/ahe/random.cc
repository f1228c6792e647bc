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

#include "jtsne/ahe/random.h"

#include <openssl/rand.h>

#include <cstdlib>
#include <cstring>
#include <iostream>

namespace jtsne::ahe {

std::string SecureRandomBytes(size_t n) {
  std::string out(n, '\0');
  if (n > 0 &&
      RAND_bytes(reinterpret_cast<unsigned char*>(out.data()),
                 static_cast<int>(n)) != 1) {
    std::cerr << "fatal: CSPRNG failure\n";
    std::abort();
  }
  return out;
}

namespace {

mpz_class FromBytes(const std::string& bytes) {
  mpz_class v;
  mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return v;
}

}  // namespace

mpz_class SecureRandomBelow(const mpz_class& bound) {
  const size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  const size_t bytes = (bits + 7) / 8;
  const size_t excess = bytes * 8 - bits;
  // Rejection sampling over the minimal bit width.
  for (;;) {
    std::string raw = SecureRandomBytes(bytes);
    if (excess > 0) {
      raw[0] = static_cast<char>(static_cast<uint8_t>(raw[0]) &
                                 (0xffu >> excess));
    }
    mpz_class candidate = FromBytes(raw);
    if (candidate < bound) return candidate;
  }
}

mpz_class SecureRandomBits(int bits) {
  const size_t bytes = (static_cast<size_t>(bits) + 7) / 8;
  const size_t excess = bytes * 8 - static_cast<size_t>(bits);
  std::string raw = SecureRandomBytes(bytes);
  raw[0] = static_cast<char>(static_cast<uint8_t>(raw[0]) & (0xffu >> excess));
  mpz_class v = FromBytes(raw);
  mpz_setbit(v.get_mpz_t(), bits - 1);
  return v;
}

NoiseRng::NoiseRng(std::optional<uint64_t> seed) {
  if (seed.has_value()) engine_.emplace(*seed);
}

NoiseRng::result_type NoiseRng::operator()() {
  if (engine_.has_value()) return (*engine_)();
  if (offset_ + sizeof(result_type) > buffer_.size()) {
    buffer_ = SecureRandomBytes(512);
    offset_ = 0;
  }
  result_type v;
  std::memcpy(&v, buffer_.data() + offset_, sizeof(v));
  offset_ += sizeof(v);
  return v;
}

mpz_class NoiseRng::Below(const mpz_class& bound) {
  const size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  const size_t words = (bits + 63) / 64;
  mpz_class mask = (mpz_class(1) << bits) - 1;
  for (;;) {
    mpz_class candidate = 0;
    for (size_t w = 0; w < words; ++w) {
      candidate <<= 64;
      const result_type r = (*this)();
      candidate += mpz_class(static_cast<unsigned long>(r >> 32)) << 32;
      candidate += static_cast<unsigned long>(r & 0xffffffffu);
    }
    candidate &= mask;
    if (candidate < bound) return candidate;
  }
}

}  // namespace jtsne::ahe
